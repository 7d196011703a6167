import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from packcolor.errors import InputError, RefusalError
from packcolor.grid import (
    Cell,
    Coloring,
    GridSpec,
    Topology,
    bfs_distance_oracle,
    bfs_distances,
    distance,
    format_grid,
    parse_grid,
    verify_packing,
)


@pytest.mark.parametrize(
    "spec, a, b, expected",
    [
        (GridSpec(24, 24), (1, 1), (1, 1), 0),
        (GridSpec(24, 24), (1, 1), (24, 24), 2),
        (GridSpec(15, 9, "plane"), (1, 1), (15, 9), 22),
        (GridSpec(5, 5), (1, 1), (3, 4), 4),
    ],
)
def test_distance_examples(spec, a, b, expected):
    assert distance(spec, a, b) == expected


@pytest.mark.parametrize(
    "spec, a, b, expected",
    [
        (GridSpec(4, 4), (1, 1), (3, 3), 4),
        (GridSpec(3, 3, "plane"), (1, 1), (3, 3), 4),
        (GridSpec(24, 24), (1, 1), (24, 24), 2),
    ],
)
def test_bfs_oracle_examples(spec, a, b, expected):
    assert bfs_distance_oracle(spec, a, b) == expected


@pytest.mark.parametrize("n", [1, 2, 7])
def test_bfs_identity(n):
    spec = GridSpec(n, n)
    for cell in spec.cells():
        assert bfs_distance_oracle(spec, cell, cell) == 0


def test_bfs_refuses_huge_grid():
    with pytest.raises(RefusalError):
        bfs_distance_oracle(GridSpec(1001, 1000), (1, 1), (2, 2))


@pytest.mark.parametrize("cell", [(0, 1), (1, 0), (25, 1), (1, 25), "x", (1.5, 2)])
def test_distance_rejects_bad_cells(cell):
    with pytest.raises(InputError):
        distance(GridSpec(24, 24), cell, (1, 1))


@pytest.mark.parametrize("rows, cols", [(0, 3), (3, 0), (-1, 2)])
def test_gridspec_rejects_nonpositive(rows, cols):
    with pytest.raises(InputError):
        GridSpec(rows, cols)


def test_gridspec_topology_coercion():
    assert GridSpec(2, 3, "plane").topology is Topology.PLANE
    with pytest.raises(InputError):
        GridSpec(2, 3, "sphere")


def test_cell_index_round_trip():
    spec = GridSpec(3, 5)
    for i, cell in enumerate(spec.cells()):
        assert spec.index(cell) == i
        assert spec.cell_at(i) == cell


def test_exhaustive_distance_small():
    # the full 12x12 sweep lives in the acceptance suite
    for topology in Topology:
        for rows, cols in itertools.product(range(1, 6), repeat=2):
            spec = GridSpec(rows, cols, topology)
            for a in spec.cells():
                dist = bfs_distances(spec, a)
                for b in spec.cells():
                    assert distance(spec, a, b) == dist[b]


sizes = st.integers(1, 30)


@st.composite
def spec_and_cells(draw, n=3):
    spec = GridSpec(draw(sizes), draw(sizes), draw(st.sampled_from(list(Topology))))
    cells = [Cell(draw(st.integers(1, spec.rows)), draw(st.integers(1, spec.cols))) for _ in range(n)]
    return spec, cells


@given(spec_and_cells())
def test_distance_symmetric_and_triangle(data):
    spec, (a, b, c) = data
    assert distance(spec, a, b) == distance(spec, b, a)
    assert (distance(spec, a, b) == 0) == (a == b)
    assert distance(spec, a, c) <= distance(spec, a, b) + distance(spec, b, c)


# -- verifier ----------------------------------------------------------------------

def test_verify_all_ones_2x2():
    coloring = Coloring.from_rows(GridSpec(2, 2), [[1, 1], [1, 1]])
    verdict = verify_packing(coloring)
    assert not verdict.valid
    # 2x2 torus: each cell has 2 distinct neighbors; diagonal pairs are at distance 2 > 1
    assert [(tuple(v.first), tuple(v.second)) for v in verdict.violations] == [
        ((1, 1), (1, 2)), ((1, 1), (2, 1)), ((1, 2), (2, 2)), ((2, 1), (2, 2))]
    assert all(v.color == 1 and v.distance == 1 for v in verdict.violations)


def test_verify_single_cell():
    assert verify_packing(Coloring.from_rows(GridSpec(1, 1), [[1]])).valid


def test_verify_empty_and_partial():
    spec = GridSpec(4, 4)
    assert verify_packing(Coloring(spec)).valid
    assert verify_packing(Coloring(spec, {(1, 1): 1, (1, 3): 1})).valid
    assert not verify_packing(Coloring(spec, {(1, 1): 2, (1, 3): 2})).valid


def test_verify_boundary_distance_equal_to_color_conflicts():
    spec = GridSpec(10, 10, "plane")
    assert not verify_packing(Coloring(spec, {(1, 1): 3, (1, 4): 3})).valid
    assert verify_packing(Coloring(spec, {(1, 1): 3, (1, 5): 3})).valid


def test_verify_wraparound_matters():
    assert not verify_packing(Coloring(GridSpec(1, 6), {(1, 1): 2, (1, 6): 2})).valid
    assert verify_packing(Coloring(GridSpec(1, 6, "plane"), {(1, 1): 2, (1, 6): 2})).valid


def test_violation_order_is_row_major():
    spec = GridSpec(3, 3, "plane")
    coloring = Coloring.from_rows(spec, [[2, 1, 2], [1, 2, 1], [2, 1, 2]])
    pairs = [(spec.index(v.first), spec.index(v.second)) for v in verify_packing(coloring).violations]
    assert pairs == sorted(pairs)
    assert all(a < b for a, b in pairs)


def _pairwise_violations(coloring):
    spec = coloring.spec
    items = sorted(coloring.assignment.items(), key=lambda kv: spec.index(kv[0]))
    return [(a, b) for (a, ca), (b, cb) in itertools.combinations(items, 2)
            if ca == cb and bfs_distance_oracle(spec, a, b) <= ca]


@st.composite
def small_colorings(draw):
    spec = GridSpec(draw(st.integers(1, 6)), draw(st.integers(1, 6)), draw(st.sampled_from(list(Topology))))
    assignment = {}
    for cell in spec.cells():
        c = draw(st.integers(0, 4))
        if c:
            assignment[cell] = c
    return Coloring(spec, assignment)


@settings(max_examples=200)
@given(small_colorings())
def test_verify_matches_bfs_pairwise(coloring):
    got = [(v.first, v.second) for v in verify_packing(coloring).violations]
    assert got == _pairwise_violations(coloring)


@settings(max_examples=100)
@given(small_colorings(), st.data())
def test_removing_assignments_keeps_validity(coloring, data):
    if not verify_packing(coloring).valid or not len(coloring):
        return
    cell = data.draw(st.sampled_from(sorted(coloring.assignment)))
    assert verify_packing(coloring.without(cell)).valid


def _tile_plane(coloring, copies=3):
    n = coloring.spec.rows
    big = GridSpec(n * copies, n * copies, "plane")
    return Coloring(big, {(r + i * n, c + j * n): v for (r, c), v in coloring.assignment.items()
                          for i in range(copies) for j in range(copies)})


@st.composite
def torus_colorings(draw):
    n = draw(st.integers(2, 8))
    spec = GridSpec(n, n)
    # colors strictly below the period: a color >= n would clash with its own copy in the tiling
    rows = [[draw(st.integers(1, n - 1)) for _ in range(n)] for _ in range(n)]
    return Coloring.from_rows(spec, rows)


@settings(max_examples=150)
@given(torus_colorings())
def test_torus_validity_equals_periodic_tiling(coloring):
    n = coloring.spec.rows
    tiled = _tile_plane(coloring)
    central = lambda cell: n < cell[0] <= 2 * n and n < cell[1] <= 2 * n  # noqa: E731
    plane_bad = [v for v in verify_packing(tiled).violations if central(v.first) or central(v.second)]
    assert verify_packing(coloring).valid == (not plane_bad)


def test_period_color_clashes_with_own_copy():
    coloring = Coloring.from_rows(GridSpec(1, 1), [[1]])
    assert verify_packing(coloring).valid
    assert not verify_packing(_tile_plane(coloring)).valid


# -- grid text format ------------------------------------------------------------------

def test_grid_text_round_trip():
    coloring = Coloring(GridSpec(2, 3, "plane"), {(1, 1): 1, (2, 3): 12})
    text = format_grid(coloring)
    assert text.splitlines()[0] == "2 3 plane"
    assert parse_grid(text) == coloring


@pytest.mark.parametrize(
    "text",
    [
        "",
        "2 2\n1 1\n1 1\n",
        "2 2 torus\n1 2\n1\n",
        "2 2 torus\n1 2\n",
        "2 2 torus\n1 0\n2 1\n",
        "2 2 torus\n1 x\n2 1\n",
        "2 2 klein\n1 2\n2 1\n",
    ],
)
def test_parse_grid_rejects(text):
    with pytest.raises(InputError):
        parse_grid(text)


def test_coloring_rejects_bad_colors():
    with pytest.raises(InputError):
        Coloring(GridSpec(2, 2), {(1, 1): 0})
    with pytest.raises(InputError):
        Coloring(GridSpec(2, 2), {(3, 1): 1})
