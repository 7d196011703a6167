"""Solver bridge: an embedded DPLL solver and a subprocess runner for external ones.

The embedded solver is chronological-backtracking DPLL with unit propagation
over two watched literals and no clause learning.  It is meant to be easy to
trust on small instances, not to be fast.

External solvers are run as ``<command> <dimacs-path>`` and judged only by
their ``s``/``v`` lines.  Every SAT answer, from either route, is re-checked
clause by clause before it is returned.
"""

from __future__ import annotations

import logging
import os
import shlex
import signal
import subprocess
import tempfile
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Sequence

from packcolor.cnfio import SolveOutcome, Status, parse_solver_output, save_dimacs
from packcolor.encoder import CnfFormula
from packcolor.errors import IntegrityError, RefusalError, SolverEnvironmentError

log = logging.getLogger(__name__)

SOLVER_ENV = "PACKCOLOR_SOLVER"
EMBEDDED_ID = "embedded-dpll"


@dataclass(frozen=True)
class Limits:
    max_vars: int = 5000
    max_conflicts: int | None = None


class _Dpll:
    """Mutable search state.  Literals map to watch slots as ``2*var + (lit < 0)``."""

    def __init__(self, num_vars: int):
        self.n = num_vars
        self.value = [0] * (num_vars + 1)
        self.watches: list[list[list[int]]] = [[] for _ in range(2 * num_vars + 2)]
        self.trail: list[int] = []
        self.qhead = 0
        self.root_units: list[int] = []
        self.inconsistent = False
        self.conflicts = 0

    @staticmethod
    def _slot(lit: int) -> int:
        return 2 * lit if lit > 0 else -2 * lit + 1

    def _lit_value(self, lit: int) -> int:
        v = self.value[abs(lit)]
        return v if lit > 0 else -v

    def add_clause(self, lits: Iterable[int]) -> None:
        """Add a clause; only legal while no decisions are on the trail."""
        clause: list[int] = []
        for lit in lits:
            if -lit in clause:
                return
            if lit not in clause:
                clause.append(lit)
        if not clause:
            self.inconsistent = True
        elif len(clause) == 1:
            self.root_units.append(clause[0])
        else:
            self.watches[self._slot(clause[0])].append(clause)
            self.watches[self._slot(clause[1])].append(clause)

    def _assign(self, lit: int) -> None:
        self.value[abs(lit)] = 1 if lit > 0 else -1
        self.trail.append(lit)

    def _undo_to(self, pos: int) -> None:
        value = self.value
        for lit in self.trail[pos:]:
            value[abs(lit)] = 0
        del self.trail[pos:]
        self.qhead = min(self.qhead, pos)

    def _propagate(self) -> bool:
        """Unit propagation; returns False on conflict."""
        value = self.value
        watches = self.watches
        trail = self.trail
        while self.qhead < len(trail):
            false_lit = -trail[self.qhead]
            self.qhead += 1
            slot = 2 * false_lit if false_lit > 0 else -2 * false_lit + 1
            watching = watches[slot]
            keep: list[list[int]] = []
            i = 0
            n_watch = len(watching)
            while i < n_watch:
                clause = watching[i]
                i += 1
                if clause[0] == false_lit:
                    clause[0], clause[1] = clause[1], false_lit
                other = clause[0]
                ov = value[other] if other > 0 else -value[-other]
                if ov == 1:
                    keep.append(clause)
                    continue
                for k in range(2, len(clause)):
                    lit = clause[k]
                    lv = value[lit] if lit > 0 else -value[-lit]
                    if lv != -1:
                        clause[1], clause[k] = lit, false_lit
                        watches[2 * lit if lit > 0 else -2 * lit + 1].append(clause)
                        break
                else:
                    keep.append(clause)
                    if ov == -1:
                        keep.extend(watching[i:])
                        watches[slot] = keep
                        return False
                    value[abs(other)] = 1 if other > 0 else -1
                    trail.append(other)
            watches[slot] = keep
        return True

    def search(self, order: Sequence[int], projection: set[int] | None = None,
               max_conflicts: int | None = None) -> Iterator[Status]:
        """Yield SAT once per model found, then a final UNSAT or UNKNOWN.

        Variables are decided in ``order``, true branch first.  When
        ``projection`` is given it must be a prefix of ``order``; after each
        model the search resumes at the most recent projection decision whose
        false branch is still open.  That skips every other extension of the
        projected assignment, as a blocking clause over those decisions would.
        """
        self._undo_to(0)
        if self.inconsistent:
            yield Status.UNSAT
            return
        for lit in self.root_units:
            lv = self._lit_value(lit)
            if lv == -1:
                yield Status.UNSAT
                return
            if lv == 0:
                self._assign(lit)
        decisions: list[tuple[int, int, bool]] = []
        value = self.value
        cursor = 0
        n_order = len(order)

        def backtrack(only_projection: bool) -> bool:
            while decisions:
                pos, lit, flipped = decisions.pop()
                self._undo_to(pos)
                if flipped or (only_projection and abs(lit) not in projection):
                    continue
                decisions.append((pos, -lit, True))
                self._assign(-lit)
                return True
            return False

        while True:
            if not self._propagate():
                self.conflicts += 1
                if max_conflicts is not None and self.conflicts > max_conflicts:
                    self._undo_to(0)
                    yield Status.UNKNOWN
                    return
                if not backtrack(False):
                    yield Status.UNSAT
                    return
                cursor = 0
                continue
            while cursor < n_order and value[order[cursor]] != 0:
                cursor += 1
            if cursor == n_order:
                yield Status.SAT
                if projection is None or not backtrack(True):
                    yield Status.UNSAT
                    return
                cursor = 0
                continue
            decisions.append((len(self.trail), order[cursor], False))
            self._assign(order[cursor])

    def solve(self, max_conflicts: int | None = None) -> Status:
        return next(self.search(range(1, self.n + 1), max_conflicts=max_conflicts))

    def model(self) -> dict[int, bool]:
        return {v: self.value[v] == 1 for v in range(1, self.n + 1)}


def _check_limits(formula: CnfFormula, limits: Limits) -> None:
    if formula.num_vars > limits.max_vars:
        raise RefusalError(
            f"formula has {formula.num_vars} variables; the embedded solver is limited to "
            f"{limits.max_vars}. Use an external solver (set {SOLVER_ENV})."
        )


def check_model(formula: CnfFormula, model: dict[int, bool], solver_id: str) -> None:
    """Raise IntegrityError unless ``model`` satisfies every clause of ``formula``."""
    bad = formula.satisfied_by(model)
    if bad is not None:
        raise IntegrityError(f"{solver_id}: model falsifies clause {bad + 1}: {formula[bad]}")


def solve_embedded(formula: CnfFormula, limits: Limits | None = None) -> SolveOutcome:
    limits = limits or Limits()
    _check_limits(formula, limits)
    start = time.perf_counter()
    dpll = _Dpll(formula.num_vars)
    for clause in formula:
        dpll.add_clause(clause)
    status = dpll.solve(limits.max_conflicts)
    elapsed = time.perf_counter() - start
    if status is Status.SAT:
        model = dpll.model()
        check_model(formula, model, EMBEDDED_ID)
        return SolveOutcome(Status.SAT, model=model, wall_time=elapsed, solver_id=EMBEDDED_ID)
    reason = "conflict budget exhausted" if status is Status.UNKNOWN else None
    return SolveOutcome(status, reason=reason, wall_time=elapsed, solver_id=EMBEDDED_ID)


def enumerate_models(formula: CnfFormula, projection: Iterable[int],
                     limits: Limits | None = None) -> list[dict[int, bool]]:
    """All distinct projections of the formula's models, in lexicographic order (False < True).

    Projection variables are decided first; once a model is found, the
    search resumes by flipping the most recent open projection decision,
    which is the effect of adding the blocking clause over those decisions.
    Each projected assignment is therefore reported exactly once.
    """
    limits = limits or Limits()
    _check_limits(formula, limits)
    proj = sorted(set(projection))
    if any(not 1 <= v <= formula.num_vars for v in proj):
        raise ValueError("projection variable outside the formula")
    dpll = _Dpll(formula.num_vars)
    for clause in formula:
        dpll.add_clause(clause)
    proj_set = set(proj)
    order = proj + [v for v in range(1, formula.num_vars + 1) if v not in proj_set]
    found: list[dict[int, bool]] = []
    for status in dpll.search(order, proj_set, limits.max_conflicts):
        if status is Status.UNKNOWN:
            raise RefusalError("conflict budget exhausted during model enumeration")
        if status is Status.SAT:
            model = dpll.model()
            check_model(formula, model, EMBEDDED_ID)
            found.append({v: model[v] for v in proj})
    found.sort(key=lambda m: tuple(m[v] for v in proj))
    return found


# -- external solvers ------------------------------------------------------------

def default_solver_command() -> str:
    cmd = os.environ.get(SOLVER_ENV)
    if not cmd:
        raise SolverEnvironmentError(f"no solver command given and {SOLVER_ENV} is not set")
    return cmd


def _kill(proc: subprocess.Popen) -> None:
    if proc.poll() is None:
        try:
            os.killpg(proc.pid, signal.SIGKILL)
        except (ProcessLookupError, PermissionError):
            proc.kill()
    proc.wait()


def solve_portfolio(formula: CnfFormula, commands: Sequence[str], timeout: float,
                    comments: Iterable[str] = (), poll_interval: float = 0.02) -> SolveOutcome:
    """Run independent solver processes on one instance; the first SAT/UNSAT answer wins.

    The losing processes are killed.  ``solver_id`` of the result names the
    winning command and its position, e.g. ``"kissat #2"``.
    """
    if timeout <= 0:
        raise ValueError("timeout must be positive")
    if not commands:
        raise ValueError("no solver commands")
    with tempfile.TemporaryDirectory(prefix="packcolor-") as tmp:
        cnf_path = Path(tmp) / "instance.cnf"
        save_dimacs(cnf_path, formula, comments)
        start = time.perf_counter()
        running: dict[int, tuple[subprocess.Popen, Path]] = {}
        try:
            for i, cmd in enumerate(commands):
                argv = shlex.split(cmd) + [str(cnf_path)]
                out_path = Path(tmp) / f"out{i}.txt"
                with open(out_path, "w") as out:
                    try:
                        proc = subprocess.Popen(argv, stdout=out, stderr=subprocess.DEVNULL,
                                                start_new_session=True)
                    except OSError as exc:
                        raise SolverEnvironmentError(f"cannot launch {cmd!r}: {exc}") from exc
                running[i] = (proc, out_path)
            log.debug("launched %d solver process(es) on %s", len(running), cnf_path)

            reasons: list[str] = []
            while running:
                elapsed = time.perf_counter() - start
                if elapsed > timeout:
                    return SolveOutcome(Status.UNKNOWN, reason=f"timeout after {timeout:g}s",
                                        wall_time=elapsed, solver_id=_ids(commands))
                for i in list(running):
                    proc, out_path = running[i]
                    if proc.poll() is None:
                        continue
                    del running[i]
                    solver_id = commands[i] if len(commands) == 1 else f"{commands[i]} #{i}"
                    outcome = parse_solver_output(out_path.read_text(), formula.num_vars)
                    outcome.wall_time = time.perf_counter() - start
                    outcome.solver_id = solver_id
                    if outcome.is_sat:
                        check_model(formula, outcome.model, solver_id)
                    if outcome.definitive:
                        return outcome
                    reasons.append(f"{solver_id}: {outcome.reason} (exit {proc.returncode})")
                time.sleep(poll_interval)
            return SolveOutcome(Status.UNKNOWN, reason="; ".join(reasons),
                                wall_time=time.perf_counter() - start, solver_id=_ids(commands))
        finally:
            for proc, _ in running.values():
                _kill(proc)


def _ids(commands: Sequence[str]) -> str:
    return commands[0] if len(commands) == 1 else " | ".join(commands)


def solve_external(formula: CnfFormula, solver_command: str | None = None,
                   timeout: float = 3600.0, comments: Iterable[str] = ()) -> SolveOutcome:
    command = solver_command or default_solver_command()
    return solve_portfolio(formula, [command], timeout, comments)
