"""Grid topology, colorings, and the independent packing-coloring verifier.

Every interface speaks 1-based ``(row, col)`` coordinates.  Internally a cell
also has a 0-based row-major index, ``(row - 1) * cols + (col - 1)``, which the
encoder uses for variable numbering and the verifier uses for ordering.
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass
from pathlib import Path
from types import MappingProxyType
from typing import Iterable, Iterator, Mapping, NamedTuple

import numpy as np

from packcolor.errors import InputError, RefusalError

BFS_CELL_LIMIT = 10**6


class Topology(str, enum.Enum):
    TORUS = "torus"
    PLANE = "plane"


class Cell(NamedTuple):
    row: int
    col: int


@dataclass(frozen=True)
class GridSpec:
    """A ``rows x cols`` grid, either wrapping (torus) or not (plane)."""

    rows: int
    cols: int
    topology: Topology = Topology.TORUS

    def __post_init__(self) -> None:
        for name in ("rows", "cols"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int) or value < 1:
                raise InputError(f"{name} must be a positive integer, got {value!r}")
        try:
            object.__setattr__(self, "topology", Topology(self.topology))
        except ValueError:
            raise InputError(f"unknown topology {self.topology!r}") from None

    @property
    def size(self) -> int:
        return self.rows * self.cols

    @property
    def is_torus(self) -> bool:
        return self.topology is Topology.TORUS

    def cells(self) -> Iterator[Cell]:
        """All cells in row-major order."""
        for r in range(1, self.rows + 1):
            for c in range(1, self.cols + 1):
                yield Cell(r, c)

    def check(self, cell: tuple[int, int]) -> Cell:
        try:
            r, c = cell
        except (TypeError, ValueError):
            raise InputError(f"not a cell: {cell!r}") from None
        if not (isinstance(r, (int, np.integer)) and isinstance(c, (int, np.integer))):
            raise InputError(f"cell coordinates must be integers: {cell!r}")
        if not (1 <= r <= self.rows and 1 <= c <= self.cols):
            raise InputError(f"cell {tuple(cell)} outside {self.rows}x{self.cols} grid")
        return Cell(int(r), int(c))

    def index(self, cell: tuple[int, int]) -> int:
        r, c = self.check(cell)
        return (r - 1) * self.cols + (c - 1)

    def cell_at(self, index: int) -> Cell:
        if not 0 <= index < self.size:
            raise InputError(f"cell index {index} out of range")
        return Cell(index // self.cols + 1, index % self.cols + 1)

    def neighbors(self, cell: Cell) -> list[Cell]:
        """Adjacent cells in the grid graph (duplicates removed on tiny tori)."""
        r, c = cell
        out: list[Cell] = []
        for dr, dc in ((-1, 0), (1, 0), (0, -1), (0, 1)):
            nr, nc = r + dr, c + dc
            if self.is_torus:
                nr = (nr - 1) % self.rows + 1
                nc = (nc - 1) % self.cols + 1
            elif not (1 <= nr <= self.rows and 1 <= nc <= self.cols):
                continue
            nb = Cell(nr, nc)
            if nb != cell and nb not in out:
                out.append(nb)
        return out


def _axis_distance(a: int, b: int, n: int, wrap: bool) -> int:
    if wrap:
        return min((a - b) % n, (b - a) % n)
    return abs(a - b)


def distance(spec: GridSpec, a: tuple[int, int], b: tuple[int, int]) -> int:
    """Graph distance between two cells, computed in closed form."""
    ar, ac = spec.check(a)
    br, bc = spec.check(b)
    wrap = spec.is_torus
    return _axis_distance(ar, br, spec.rows, wrap) + _axis_distance(ac, bc, spec.cols, wrap)


def bfs_distance_oracle(spec: GridSpec, a: tuple[int, int], b: tuple[int, int]) -> int:
    """Breadth-first-search distance on the explicit grid graph.

    Slow on purpose: it shares no arithmetic with :func:`distance` and exists
    to check it.
    """
    if spec.size > BFS_CELL_LIMIT:
        raise RefusalError(f"grid has {spec.size} cells; BFS oracle is limited to {BFS_CELL_LIMIT}")
    return bfs_distances(spec, a)[spec.check(b)]


def bfs_distances(spec: GridSpec, source: tuple[int, int]) -> dict[Cell, int]:
    """Single-source BFS distances from ``source`` to every cell."""
    if spec.size > BFS_CELL_LIMIT:
        raise RefusalError(f"grid has {spec.size} cells; BFS oracle is limited to {BFS_CELL_LIMIT}")
    start = spec.check(source)
    seen = {start: 0}
    queue = deque([start])
    while queue:
        cur = queue.popleft()
        for nb in spec.neighbors(cur):
            if nb not in seen:
                seen[nb] = seen[cur] + 1
                queue.append(nb)
    return seen


class Coloring:
    """A total or partial assignment of positive colors to the cells of a grid.

    Instances are immutable; helpers that "modify" a coloring return a new one.
    """

    __slots__ = ("spec", "_assignment")

    def __init__(self, spec: GridSpec, assignment: Mapping[tuple[int, int], int] | None = None):
        self.spec = spec
        cleaned: dict[Cell, int] = {}
        for cell, color in (assignment or {}).items():
            cell = spec.check(cell)
            if isinstance(color, bool) or not isinstance(color, (int, np.integer)) or color < 1:
                raise InputError(f"color at {tuple(cell)} must be a positive integer, got {color!r}")
            cleaned[cell] = int(color)
        self._assignment = MappingProxyType(dict(sorted(cleaned.items())))

    @classmethod
    def from_rows(cls, spec: GridSpec, rows: Iterable[Iterable[int | None]]) -> "Coloring":
        """Build from a row-major nested list; ``None`` (or 0) marks an unassigned cell."""
        rows = [list(r) for r in rows]
        if len(rows) != spec.rows or any(len(r) != spec.cols for r in rows):
            raise InputError(f"expected {spec.rows} rows of {spec.cols} entries")
        return cls(
            spec,
            {
                Cell(i, j): v
                for i, row in enumerate(rows, 1)
                for j, v in enumerate(row, 1)
                if v is not None and v != 0
            },
        )

    @property
    def assignment(self) -> Mapping[Cell, int]:
        return self._assignment

    def __getitem__(self, cell: tuple[int, int]) -> int:
        return self._assignment[Cell(*cell)]

    def get(self, cell: tuple[int, int], default: int | None = None) -> int | None:
        return self._assignment.get(Cell(*cell), default)

    def __contains__(self, cell: object) -> bool:
        return cell in self._assignment

    def __len__(self) -> int:
        return len(self._assignment)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Coloring):
            return NotImplemented
        return self.spec == other.spec and self._assignment == other._assignment

    def __hash__(self) -> int:
        return hash((self.spec, tuple(self._assignment.items())))

    def __repr__(self) -> str:
        return f"Coloring({self.spec.rows}x{self.spec.cols} {self.spec.topology.value}, {len(self)} assigned)"

    @property
    def is_total(self) -> bool:
        return len(self._assignment) == self.spec.size

    def max_color(self) -> int:
        return max(self._assignment.values(), default=0)

    def to_rows(self) -> list[list[int | None]]:
        return [[self._assignment.get(Cell(r, c)) for c in range(1, self.spec.cols + 1)]
                for r in range(1, self.spec.rows + 1)]

    def to_array(self) -> np.ndarray:
        """Dense ``rows x cols`` integer array with 0 for unassigned cells."""
        arr = np.zeros((self.spec.rows, self.spec.cols), dtype=np.int64)
        for (r, c), v in self._assignment.items():
            arr[r - 1, c - 1] = v
        return arr

    def without(self, cell: tuple[int, int]) -> "Coloring":
        rest = dict(self._assignment)
        rest.pop(Cell(*cell), None)
        return Coloring(self.spec, rest)


class Violation(NamedTuple):
    first: Cell
    second: Cell
    color: int
    distance: int


@dataclass(frozen=True)
class Verdict:
    violations: tuple[Violation, ...] = ()

    @property
    def valid(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.valid


_PAIR_BLOCK = 1024


def verify_packing(coloring: Coloring) -> Verdict:
    """Check every same-colored pair of assigned cells against its packing distance.

    All pairs in each color class are compared (no neighborhood scanning), so
    the check does not share logic with the encoder's pair enumeration.
    Violations are ordered by the row-major position of the first cell, then
    the second.
    """
    spec = coloring.spec
    by_color: dict[int, list[Cell]] = {}
    for cell, color in coloring.assignment.items():
        by_color.setdefault(color, []).append(cell)

    found: list[tuple[int, int, Violation]] = []
    for color, cells in by_color.items():
        if len(cells) < 2:
            continue
        pos = np.array(cells, dtype=np.int64) - 1
        idx = pos[:, 0] * spec.cols + pos[:, 1]
        for start in range(0, len(cells), _PAIR_BLOCK):
            block = pos[start:start + _PAIR_BLOCK]
            dr = np.abs(block[:, None, 0] - pos[None, :, 0])
            dc = np.abs(block[:, None, 1] - pos[None, :, 1])
            if spec.is_torus:
                dr = np.minimum(dr, spec.rows - dr)
                dc = np.minimum(dc, spec.cols - dc)
            dist = dr + dc
            bi, bj = np.nonzero(dist <= color)
            bi = bi + start
            keep = idx[bi] < idx[bj]
            for i, j in zip(bi[keep].tolist(), bj[keep].tolist()):
                d = int(dist[i - start, j])
                found.append((int(idx[i]), int(idx[j]), Violation(cells[i], cells[j], color, d)))
    found.sort(key=lambda t: (t[0], t[1]))
    return Verdict(tuple(v for _, _, v in found))


def is_packing(coloring: Coloring) -> bool:
    return verify_packing(coloring).valid


# -- grid text format --------------------------------------------------------

def parse_grid(text: str) -> Coloring:
    """Parse the grid text format.

    First line ``rows cols topology`` (topology is ``torus`` or ``plane``),
    then ``rows`` lines of ``cols`` tokens, each a positive color or ``.``.
    Blank lines and lines starting with ``#`` are skipped.
    """
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise InputError("empty grid file")
    head = lines[0].split()
    if len(head) != 3:
        raise InputError(f"bad header {lines[0]!r}; expected 'rows cols topology'")
    try:
        rows, cols = int(head[0]), int(head[1])
    except ValueError:
        raise InputError(f"bad header {lines[0]!r}") from None
    spec = GridSpec(rows, cols, head[2])
    body = lines[1:]
    if len(body) != rows:
        raise InputError(f"expected {rows} grid rows, found {len(body)}")
    assignment: dict[Cell, int] = {}
    for i, line in enumerate(body, 1):
        tokens = line.split()
        if len(tokens) != cols:
            raise InputError(f"row {i} has {len(tokens)} entries, expected {cols}")
        for j, tok in enumerate(tokens, 1):
            if tok == ".":
                continue
            if not tok.isdigit() or int(tok) < 1:
                raise InputError(f"bad token {tok!r} at ({i},{j})")
            assignment[Cell(i, j)] = int(tok)
    return Coloring(spec, assignment)


def format_grid(coloring: Coloring) -> str:
    spec = coloring.spec
    width = max(1, len(str(coloring.max_color())))
    out = [f"{spec.rows} {spec.cols} {spec.topology.value}"]
    for row in coloring.to_rows():
        out.append(" ".join(("." if v is None else str(v)).rjust(width) for v in row))
    return "\n".join(out) + "\n"


def read_grid(path: str | Path) -> Coloring:
    return parse_grid(Path(path).read_text())


def write_grid(path: str | Path, coloring: Coloring) -> None:
    Path(path).write_text(format_grid(coloring))
