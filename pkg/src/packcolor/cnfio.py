"""DIMACS serialization, SAT-competition output parsing, and model decoding."""

from __future__ import annotations

import enum
import io
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable, Mapping

from packcolor.encoder import CnfFormula, VarMap
from packcolor.errors import DecodeError, ParseError
from packcolor.grid import Coloring

SolverModel = dict  # variable index -> bool, total over 1..num_vars


class Status(str, enum.Enum):
    SAT = "sat"
    UNSAT = "unsat"
    UNKNOWN = "unknown"


@dataclass
class SolveOutcome:
    status: Status
    model: dict[int, bool] | None = None
    reason: str | None = None
    wall_time: float = 0.0
    solver_id: str = ""

    def __post_init__(self) -> None:
        self.status = Status(self.status)
        if self.status is Status.SAT and self.model is None:
            raise ValueError("a SAT outcome needs a model")
        if self.status is not Status.SAT and self.model is not None:
            raise ValueError(f"a {self.status.value} outcome carries no model")

    @property
    def is_sat(self) -> bool:
        return self.status is Status.SAT

    @property
    def is_unsat(self) -> bool:
        return self.status is Status.UNSAT

    @property
    def definitive(self) -> bool:
        return self.status is not Status.UNKNOWN


# -- DIMACS ------------------------------------------------------------------

def dump_dimacs(formula: CnfFormula, fp: IO[str], comments: Iterable[str] = ()) -> None:
    for line in comments:
        fp.write(f"c {line}\n" if line else "c\n")
    fp.write(f"p cnf {formula.num_vars} {formula.num_clauses}\n")
    buf: list[str] = []
    for clause in formula:
        buf.append(" ".join(map(str, clause)) + " 0\n")
        if len(buf) >= 65536:
            fp.write("".join(buf))
            buf.clear()
    fp.write("".join(buf))


def write_dimacs(formula: CnfFormula, comments: Iterable[str] = ()) -> str:
    out = io.StringIO()
    dump_dimacs(formula, out, comments)
    return out.getvalue()


def varmap_comments(varmap: VarMap) -> list[str]:
    """Self-describing header lines; DIMACS readers ignore them."""
    lines = [f"packcolor {varmap.summary()}",
             f"position vars 1..{varmap.num_position_vars}: P(i,j,k) = ((i-1)*cols + (j-1))*colors + k"]
    if varmap.num_groups:
        lines.append(f"commander vars {varmap.num_position_vars + 1}..{varmap.total_vars}, "
                     f"{varmap.num_groups} per cell, groups {list(varmap.groups)}")
    return lines


def read_dimacs(source: str | Iterable[str]) -> CnfFormula:
    """Parse DIMACS CNF text (or an iterable of lines) back into a formula.

    Clauses may span lines; comment lines are ignored.  The declared clause
    count must match what was read.
    """
    lines = source.splitlines() if isinstance(source, str) else source
    formula: CnfFormula | None = None
    declared = 0
    pending: list[int] = []
    for lineno, line in enumerate(lines, 1):
        line = line.strip()
        if not line or line.startswith("c") or line.startswith("%"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if formula is not None or len(parts) != 4 or parts[1] != "cnf":
                raise ParseError(f"line {lineno}: bad problem line {line!r}")
            try:
                num_vars, declared = int(parts[2]), int(parts[3])
            except ValueError:
                raise ParseError(f"line {lineno}: bad problem line {line!r}") from None
            formula = CnfFormula(num_vars)
            continue
        if formula is None:
            raise ParseError(f"line {lineno}: clause before problem line")
        try:
            lits = [int(t) for t in line.split()]
        except ValueError:
            raise ParseError(f"line {lineno}: non-integer literal in {line!r}") from None
        for lit in lits:
            if lit == 0:
                formula.add_clause(pending)
                pending = []
            elif abs(lit) > formula.num_vars:
                raise ParseError(f"line {lineno}: literal {lit} exceeds declared {formula.num_vars} vars")
            else:
                pending.append(lit)
    if formula is None:
        raise ParseError("no problem line")
    if pending:
        raise ParseError("last clause is not terminated by 0")
    if formula.num_clauses != declared:
        raise ParseError(f"header declares {declared} clauses, found {formula.num_clauses}")
    return formula


def load_dimacs(path: str | Path) -> CnfFormula:
    with open(path) as fp:
        return read_dimacs(fp)


def save_dimacs(path: str | Path, formula: CnfFormula, comments: Iterable[str] = ()) -> None:
    with open(path, "w") as fp:
        dump_dimacs(formula, fp, comments)


# -- solver output -------------------------------------------------------------

_STATUS_WORDS = {
    "SATISFIABLE": Status.SAT,
    "UNSATISFIABLE": Status.UNSAT,
    "UNKNOWN": Status.UNKNOWN,
    "INDETERMINATE": Status.UNKNOWN,
}


def parse_solver_output(text: str, num_vars: int | None = None) -> SolveOutcome:
    """Read ``s`` status and ``v`` value lines as printed by competition-style solvers.

    With ``num_vars`` given, a SAT answer must assign every variable 1..num_vars
    and nothing beyond it.  Exit codes are never consulted.
    """
    status: Status | None = None
    model: dict[int, bool] = {}
    terminated = False
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if line.startswith("s ") or line == "s":
            word = line[1:].strip().upper()
            if word not in _STATUS_WORDS:
                raise ParseError(f"line {lineno}: unrecognized status {line!r}")
            if status is not None and _STATUS_WORDS[word] is not status:
                raise ParseError(f"line {lineno}: conflicting status lines")
            status = _STATUS_WORDS[word]
        elif line.startswith("v ") or line == "v":
            for tok in line[1:].split():
                try:
                    lit = int(tok)
                except ValueError:
                    raise ParseError(f"line {lineno}: bad literal {tok!r}") from None
                if lit == 0:
                    terminated = True
                    continue
                if terminated:
                    raise ParseError(f"line {lineno}: values after terminating 0")
                var = abs(lit)
                if num_vars is not None and var > num_vars:
                    raise ParseError(f"line {lineno}: variable {var} beyond declared {num_vars}")
                if model.get(var, lit > 0) != (lit > 0):
                    raise ParseError(f"line {lineno}: variable {var} assigned both ways")
                model[var] = lit > 0

    if status is None:
        return SolveOutcome(Status.UNKNOWN, reason="malformed: no status line in solver output")
    if status is Status.SAT:
        if not terminated:
            raise ParseError("SAT answer with unterminated or missing model")
        if num_vars is not None:
            missing = [v for v in range(1, num_vars + 1) if v not in model]
            if missing:
                raise ParseError(f"SAT answer leaves {len(missing)} variables unassigned (first: {missing[0]})")
        return SolveOutcome(Status.SAT, model=model)
    if status is Status.UNKNOWN:
        return SolveOutcome(Status.UNKNOWN, reason="solver reported UNKNOWN")
    return SolveOutcome(Status.UNSAT)


def format_solver_output(outcome: SolveOutcome, width: int = 20) -> str:
    """Inverse of :func:`parse_solver_output`, used by the bundled solver shims."""
    if outcome.status is Status.UNSAT:
        return "s UNSATISFIABLE\n"
    if outcome.status is Status.UNKNOWN:
        return "s UNKNOWN\n"
    lits = [v if val else -v for v, val in sorted(outcome.model.items())]
    lines = ["s SATISFIABLE"]
    for i in range(0, len(lits), width):
        lines.append("v " + " ".join(map(str, lits[i:i + width])))
    lines.append("v 0")
    return "\n".join(lines) + "\n"


# -- decoding --------------------------------------------------------------------

def decode_model(model: Mapping[int, bool], varmap: VarMap, plants: Coloring | None = None) -> Coloring:
    """Color each cell with the smallest ``k`` whose ``P(cell, k)`` is true.

    The encoding has no at-most-one constraint, so several colors may be true
    for one cell; each true literal already satisfies every conflict clause,
    so any choice among them is a valid packing coloring.  Cells in ``plants``
    take their planted color instead (its unit clause makes it true), so the
    result always extends the plants.
    """
    m = varmap.max_color
    planted = plants.assignment if plants is not None else {}
    assignment = {}
    for idx in range(varmap.spec.size):
        cell = varmap.spec.cell_at(idx)
        for k in range(1, m + 1):
            var = idx * m + k
            if var not in model:
                raise DecodeError(f"model does not assign variable {var} (P{tuple(cell)}, color {k})")
        if cell in planted:
            k = planted[cell]
            if not 1 <= k <= m or not model[idx * m + k]:
                raise DecodeError(f"planted color {k} at {tuple(cell)} is not true in the model")
            assignment[cell] = k
            continue
        true_colors = [k for k in range(1, m + 1) if model[idx * m + k]]
        if not true_colors:
            raise DecodeError(f"no color is true for cell {tuple(cell)}")
        assignment[cell] = true_colors[0]
    return Coloring(varmap.spec, assignment)
