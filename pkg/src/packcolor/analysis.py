"""Colorings as objects of study: fixtures, blow-ups, stripping, frequencies, brute force."""

from __future__ import annotations

import enum
import hashlib
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from typing import Mapping

from packcolor.errors import InputError, RefusalError
from packcolor.grid import Cell, Coloring, GridSpec, distance, parse_grid, verify_packing

BRUTE_FORCE_MAX_CELLS = 25
BRUTE_FORCE_MAX_COLORS = 8


class Fixture(str, enum.Enum):
    SH17_24 = "sh17_24"
    OURS16_48 = "ours16_48"
    OURS15_72 = "ours15_72"


FIXTURE_SHA256 = {
    Fixture.SH17_24: "fadfe02e885ff9cf69240aa4d778213af070525930d0a19b978e5be4b67c59d4",
    Fixture.OURS16_48: "4cf34fee5fae7c9f9e9825659d163385ca02f33a2f266237a343baabe6088df5",
    Fixture.OURS15_72: "63433bcd07a4adcb3250b87a1fd5c8af54b67efc009a523aa6db22e7ac3cf1c1",
}

FIXTURE_ALIASES = {
    "sh17": Fixture.SH17_24,
    "ours16": Fixture.OURS16_48,
    "ours15": Fixture.OURS15_72,
}


class FixtureError(InputError):
    pass


def fixture_text(fixture: Fixture | str) -> str:
    fixture = resolve_fixture(fixture)
    return resources.files("packcolor.fixtures").joinpath(f"{fixture.value}.txt").read_text()


def resolve_fixture(name: Fixture | str) -> Fixture:
    if isinstance(name, Fixture):
        return name
    key = name.lower()
    if key in FIXTURE_ALIASES:
        return FIXTURE_ALIASES[key]
    try:
        return Fixture(key)
    except ValueError:
        known = ", ".join(sorted([*FIXTURE_ALIASES, *(f.value for f in Fixture)]))
        raise InputError(f"unknown fixture {name!r}; known: {known}") from None


def load_fixture(fixture: Fixture | str, check: bool = True) -> Coloring:
    """Load a bundled coloring, refusing it if the checksum or packing check fails."""
    fixture = resolve_fixture(fixture)
    text = fixture_text(fixture)
    if check:
        digest = hashlib.sha256(text.encode()).hexdigest()
        if digest != FIXTURE_SHA256[fixture]:
            raise FixtureError(f"{fixture.value}: checksum mismatch ({digest})")
    coloring = parse_grid(text)
    if check:
        verdict = verify_packing(coloring)
        if not verdict.valid or not coloring.is_total:
            raise FixtureError(f"{fixture.value}: not a total packing coloring "
                               f"({len(verdict.violations)} violations)")
    return coloring


# -- transformations --------------------------------------------------------------

def blow_up(coloring: Coloring, factor_rows: int, factor_cols: int | None = None) -> Coloring:
    """Tile a toroidal coloring ``factor_rows x factor_cols`` times."""
    if factor_cols is None:
        factor_cols = factor_rows
    if factor_rows < 1 or factor_cols < 1:
        raise InputError(f"blow-up factors must be >= 1, got {factor_rows}x{factor_cols}")
    spec = coloring.spec
    if not spec.is_torus:
        raise InputError("only toroidal colorings can be blown up")
    big = GridSpec(spec.rows * factor_rows, spec.cols * factor_cols, spec.topology)
    assignment = {}
    for (r, c), color in coloring.assignment.items():
        for fr in range(factor_rows):
            for fc in range(factor_cols):
                assignment[Cell(r + fr * spec.rows, c + fc * spec.cols)] = color
    return Coloring(big, assignment)


def strip_colors(coloring: Coloring, max_keep: int) -> Coloring:
    """Keep only the cells whose color is at most ``max_keep``."""
    if max_keep < 1:
        raise InputError(f"max_keep must be >= 1, got {max_keep}")
    return Coloring(coloring.spec, {cell: c for cell, c in coloring.assignment.items() if c <= max_keep})


def transpose(coloring: Coloring) -> Coloring:
    spec = coloring.spec
    return Coloring(GridSpec(spec.cols, spec.rows, spec.topology),
                    {Cell(c, r): v for (r, c), v in coloring.assignment.items()})


def disagreements(planted: Coloring, full: Coloring) -> list[Cell]:
    """Cells assigned in ``planted`` whose color differs in ``full``."""
    if planted.spec != full.spec:
        raise InputError(f"grids differ: {planted.spec} vs {full.spec}")
    return [cell for cell, c in planted.assignment.items() if full.get(cell) != c]


# -- frequencies ------------------------------------------------------------------

@dataclass(frozen=True)
class FrequencyTable:
    counts: Mapping[int, int]
    total: int = field(default=0)

    def __post_init__(self) -> None:
        object.__setattr__(self, "counts", dict(sorted(self.counts.items())))
        if sum(self.counts.values()) != self.total:
            raise InputError(f"counts sum to {sum(self.counts.values())}, total says {self.total}")

    def rows(self) -> list[tuple[int, int]]:
        return list(self.counts.items())

    def format(self) -> str:
        width = max((len(str(c)) for c in self.counts), default=1)
        lines = [f"{c:>{width}}  {n}" for c, n in self.counts.items()]
        lines.append(f"{'':>{width}}  {self.total}")
        return "\n".join(lines) + "\n"


def frequency(coloring: Coloring) -> FrequencyTable:
    counts = Counter(coloring.assignment.values())
    return FrequencyTable(dict(counts), len(coloring))


def _check_contiguous(table: FrequencyTable) -> list[int]:
    colors = list(table.counts)
    if colors != list(range(1, len(colors) + 1)):
        raise InputError(f"colors {colors} are not the contiguous range 1..{len(colors)}")
    return colors


def monotonicity_breaks(table: FrequencyTable) -> list[tuple[int, int]]:
    """Consecutive color pairs ``(c, c + 1)`` where the count goes up."""
    colors = _check_contiguous(table)
    counts = table.counts
    return [(c, c + 1) for c in colors[:-1] if counts[c + 1] > counts[c]]


def is_monotone(table: FrequencyTable) -> bool:
    return not monotonicity_breaks(table)


# -- brute force ----------------------------------------------------------------------

@dataclass(frozen=True)
class SearchResult:
    coloring: Coloring | None
    nodes: int

    @property
    def found(self) -> bool:
        return self.coloring is not None


def brute_force_search(spec: GridSpec, max_color: int, plants: Coloring | None = None,
                       max_nodes: int | None = None) -> SearchResult:
    """Lexicographically first total packing coloring with colors ``1..max_color`` extending ``plants``.

    Plain backtracking: cells in row-major order, colors ascending, each
    placement checked against every already-colored cell with
    :func:`packcolor.grid.distance`.  ``coloring is None`` means the search
    space was exhausted.
    """
    if spec.size > BRUTE_FORCE_MAX_CELLS or max_color > BRUTE_FORCE_MAX_COLORS:
        raise RefusalError(f"brute force is limited to {BRUTE_FORCE_MAX_CELLS} cells and "
                           f"{BRUTE_FORCE_MAX_COLORS} colors; got {spec.size} cells, {max_color} colors")
    if max_color < 1:
        raise InputError(f"max color must be >= 1, got {max_color}")
    plants = plants if plants is not None else Coloring(spec)
    if plants.spec != spec:
        raise InputError("plants are on a different grid")
    if any(c > max_color for c in plants.assignment.values()):
        raise InputError("a planted color exceeds the max color")
    if not verify_packing(plants).valid:
        return SearchResult(None, 0)

    cells = list(spec.cells())
    fixed = dict(plants.assignment)
    placed: dict[Cell, int] = dict(fixed)
    by_color: dict[int, list[Cell]] = {k: [] for k in range(1, max_color + 1)}
    for cell, c in fixed.items():
        by_color[c].append(cell)

    def fits(cell: Cell, color: int) -> bool:
        return all(distance(spec, cell, other) > color for other in by_color[color])

    nodes = 0

    def extend(pos: int) -> bool:
        nonlocal nodes
        if pos == len(cells):
            return True
        cell = cells[pos]
        if cell in fixed:
            return extend(pos + 1)
        for color in range(1, max_color + 1):
            nodes += 1
            if max_nodes is not None and nodes > max_nodes:
                raise RefusalError(f"brute force exceeded {max_nodes} nodes")
            if fits(cell, color):
                placed[cell] = color
                by_color[color].append(cell)
                if extend(pos + 1):
                    return True
                del placed[cell]
                by_color[color].pop()
        return False

    if extend(0):
        return SearchResult(Coloring(spec, placed), nodes)
    return SearchResult(None, nodes)
