"""CNF encodings of packing-coloring problems on grids.

Position variable ``P(i, j, k)`` ("cell (i, j) has color k") is numbered
``((i - 1) * cols + (j - 1)) * m + k``.  Commander variables, when used, follow
in one contiguous block, cell by cell and group by group.

Clause order is fixed: per-cell at-least-one clauses (or their commander
replacement), then conflict clauses color by color, then planted units.
At-most-one-color-per-cell is deliberately not encoded.
"""

from __future__ import annotations

import enum
from array import array
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

from packcolor.errors import InputError
from packcolor.grid import Cell, Coloring, GridSpec, verify_packing


class CnfFormula:
    """Clause list plus variable count.

    Literals live in one flat ``array('i')`` with clause end offsets alongside,
    which keeps multi-million-clause instances affordable.  Iterating or
    indexing yields clauses as tuples.
    """

    __slots__ = ("num_vars", "_lits", "_ends")

    def __init__(self, num_vars: int = 0, clauses: Iterable[Iterable[int]] = ()):
        self.num_vars = num_vars
        self._lits = array("i")
        self._ends = array("q")
        for clause in clauses:
            self.add_clause(clause)

    def add_clause(self, lits: Iterable[int]) -> None:
        self._lits.extend(lits)
        self._ends.append(len(self._lits))

    def add_binary_clauses(self, flat: Sequence[int]) -> None:
        """Append ``len(flat) // 2`` binary clauses given as a flat literal list."""
        base = len(self._lits)
        self._lits.extend(flat)
        self._ends.extend(range(base + 2, base + len(flat) + 1, 2))

    @property
    def num_clauses(self) -> int:
        return len(self._ends)

    @property
    def num_literals(self) -> int:
        return len(self._lits)

    def __len__(self) -> int:
        return len(self._ends)

    def __getitem__(self, i: int) -> tuple[int, ...]:
        if i < 0:
            i += len(self._ends)
        if not 0 <= i < len(self._ends):
            raise IndexError(i)
        start = self._ends[i - 1] if i else 0
        return tuple(self._lits[start:self._ends[i]])

    def __iter__(self) -> Iterator[tuple[int, ...]]:
        lits = self._lits
        start = 0
        for end in self._ends:
            yield tuple(lits[start:end])
            start = end

    @property
    def clauses(self) -> list[tuple[int, ...]]:
        return list(self)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CnfFormula):
            return NotImplemented
        return (self.num_vars == other.num_vars and self._ends == other._ends
                and self._lits == other._lits)

    def __repr__(self) -> str:
        return f"CnfFormula(num_vars={self.num_vars}, num_clauses={self.num_clauses})"

    def validate(self) -> None:
        """Raise InputError unless every clause is nonempty, in range, duplicate- and tautology-free."""
        for n, clause in enumerate(self, 1):
            if not clause:
                raise InputError(f"clause {n} is empty")
            seen = set()
            for lit in clause:
                if lit == 0 or abs(lit) > self.num_vars:
                    raise InputError(f"clause {n}: literal {lit} out of range 1..{self.num_vars}")
                if lit in seen:
                    raise InputError(f"clause {n}: duplicate literal {lit}")
                if -lit in seen:
                    raise InputError(f"clause {n}: contains both {abs(lit)} and {-abs(lit)}")
                seen.add(lit)

    def satisfied_by(self, model: dict[int, bool]) -> int | None:
        """Return the 0-based index of the first falsified clause, or None if all hold."""
        lits = self._lits
        start = 0
        for n, end in enumerate(self._ends):
            for pos in range(start, end):
                lit = lits[pos]
                if model.get(abs(lit), False) == (lit > 0):
                    break
            else:
                return n
            start = end
        return None


class Scheme(str, enum.Enum):
    BASIC = "basic"
    COMMANDER = "commander"


@dataclass(frozen=True)
class VarMap:
    spec: GridSpec
    max_color: int
    scheme: Scheme = Scheme.BASIC
    group_size: int | None = None
    groups: tuple[tuple[int, int], ...] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if self.max_color < 1:
            raise InputError(f"max color must be >= 1, got {self.max_color}")
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        if self.scheme is Scheme.COMMANDER:
            if self.group_size is None or self.group_size < 2:
                raise InputError(f"commander group size must be >= 2, got {self.group_size}")
            groups = tuple(
                (lo, min(lo + self.group_size - 1, self.max_color))
                for lo in range(1, self.max_color + 1, self.group_size)
            )
        else:
            object.__setattr__(self, "group_size", None)
            groups = ()
        object.__setattr__(self, "groups", groups)

    @property
    def num_position_vars(self) -> int:
        return self.spec.size * self.max_color

    @property
    def num_groups(self) -> int:
        return len(self.groups)

    @property
    def total_vars(self) -> int:
        return self.num_position_vars + self.spec.size * self.num_groups

    def position_var(self, cell: tuple[int, int], color: int) -> int:
        if not 1 <= color <= self.max_color:
            raise InputError(f"color {color} outside 1..{self.max_color}")
        return self.spec.index(cell) * self.max_color + color

    def commander_var(self, cell: tuple[int, int], group: int) -> int:
        if not 1 <= group <= self.num_groups:
            raise InputError(f"group {group} outside 1..{self.num_groups}")
        return self.num_position_vars + self.spec.index(cell) * self.num_groups + group

    def decode_var(self, var: int) -> tuple[str, Cell, int]:
        """Inverse numbering: ``("P", cell, color)`` or ``("C", cell, group)``."""
        if 1 <= var <= self.num_position_vars:
            idx, k = divmod(var - 1, self.max_color)
            return "P", self.spec.cell_at(idx), k + 1
        if self.num_position_vars < var <= self.total_vars:
            idx, g = divmod(var - self.num_position_vars - 1, self.num_groups)
            return "C", self.spec.cell_at(idx), g + 1
        raise InputError(f"variable {var} outside 1..{self.total_vars}")

    def position_vars(self) -> range:
        return range(1, self.num_position_vars + 1)

    def summary(self) -> str:
        s = self.spec
        text = f"{s.rows}x{s.cols} {s.topology.value} colors={self.max_color} scheme={self.scheme.value}"
        if self.scheme is Scheme.COMMANDER:
            text += f" group_size={self.group_size}"
        return text


@dataclass(frozen=True)
class EncodeRequest:
    spec: GridSpec
    max_color: int
    plants: Coloring | None = None

    def __post_init__(self) -> None:
        if isinstance(self.max_color, bool) or not isinstance(self.max_color, int) or self.max_color < 1:
            raise InputError(f"max color must be a positive integer, got {self.max_color!r}")
        plants = self.plants if self.plants is not None else Coloring(self.spec)
        object.__setattr__(self, "plants", plants)
        if plants.spec != self.spec:
            raise InputError(f"plants are on {plants.spec}, request is on {self.spec}")
        over = [(cell, c) for cell, c in plants.assignment.items() if c > self.max_color]
        if over:
            cell, c = over[0]
            raise InputError(f"planted color {c} at {tuple(cell)} exceeds max color {self.max_color}")
        verdict = verify_packing(plants)
        if not verdict.valid:
            v = verdict.violations[0]
            raise InputError(
                f"plants contradict each other: color {v.color} at {tuple(v.first)} and "
                f"{tuple(v.second)} are {v.distance} apart ({len(verdict.violations)} conflicts)"
            )


def default_group_size(m: int) -> int:
    if m < 1:
        raise InputError(f"max color must be >= 1, got {m}")
    if m % 4 == 0:
        return 4
    if m % 3 == 0:
        return 3
    return 4


def _ball_offsets(k: int) -> list[tuple[int, int]]:
    return [(dr, dc) for dr in range(-k, k + 1) for dc in range(-(k - abs(dr)), k - abs(dr) + 1)
            if (dr, dc) != (0, 0)]


def conflict_partners(spec: GridSpec, k: int) -> Iterator[tuple[int, list[int]]]:
    """For each cell index ``a`` (row-major), the sorted indices ``b > a`` within distance ``k``."""
    offsets = _ball_offsets(k)
    rows, cols = spec.rows, spec.cols
    wrap = spec.is_torus
    for r in range(rows):
        for c in range(cols):
            a = r * cols + c
            partners = set()
            for dr, dc in offsets:
                nr, nc = r + dr, c + dc
                if wrap:
                    nr %= rows
                    nc %= cols
                elif not (0 <= nr < rows and 0 <= nc < cols):
                    continue
                b = nr * cols + nc
                if b > a:
                    partners.add(b)
            yield a, sorted(partners)


def _add_conflicts(formula: CnfFormula, spec: GridSpec, m: int) -> None:
    for k in range(1, m + 1):
        flat: list[int] = []
        for a, partners in conflict_partners(spec, k):
            na = -(a * m + k)
            for b in partners:
                flat.append(na)
                flat.append(-(b * m + k))
        formula.add_binary_clauses(flat)


def _add_plants(formula: CnfFormula, varmap: VarMap, plants: Coloring) -> None:
    for cell, color in plants.assignment.items():
        formula.add_clause((varmap.position_var(cell, color),))


def encode_basic(req: EncodeRequest) -> tuple[CnfFormula, VarMap]:
    varmap = VarMap(req.spec, req.max_color, Scheme.BASIC)
    m = req.max_color
    formula = CnfFormula(varmap.total_vars)
    for a in range(req.spec.size):
        formula.add_clause(range(a * m + 1, a * m + m + 1))
    _add_conflicts(formula, req.spec, m)
    _add_plants(formula, varmap, req.plants)
    return formula, varmap


def encode_commander(req: EncodeRequest, group_size: int | None = None) -> tuple[CnfFormula, VarMap]:
    """Commander encoding: per cell, one guard clause ``-C_g | P_lo..P_hi`` per
    contiguous color group, then ``C_1 | ... | C_G``.
    """
    if group_size is None:
        group_size = default_group_size(req.max_color)
    varmap = VarMap(req.spec, req.max_color, Scheme.COMMANDER, group_size)
    m = req.max_color
    n_groups = varmap.num_groups
    base = varmap.num_position_vars
    formula = CnfFormula(varmap.total_vars)
    for a in range(req.spec.size):
        first_cmd = base + a * n_groups + 1
        for g, (lo, hi) in enumerate(varmap.groups):
            formula.add_clause([-(first_cmd + g), *range(a * m + lo, a * m + hi + 1)])
        formula.add_clause(range(first_cmd, first_cmd + n_groups))
    _add_conflicts(formula, req.spec, m)
    _add_plants(formula, varmap, req.plants)
    return formula, varmap


def encode(req: EncodeRequest, scheme: Scheme | str = Scheme.BASIC,
           group_size: int | None = None) -> tuple[CnfFormula, VarMap]:
    if Scheme(scheme) is Scheme.COMMANDER:
        return encode_commander(req, group_size)
    return encode_basic(req)
