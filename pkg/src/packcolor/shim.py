"""A competition-style solver command: ``packcolor-sat [--backend NAME] FILE.cnf``.

Prints ``s SATISFIABLE`` with ``v`` lines, ``s UNSATISFIABLE``, or
``s UNKNOWN``, and exits 10/20/0 accordingly.  The ``embedded`` backend is the
bundled DPLL solver; any other name is handed to PySAT (``cadical195``,
``glucose4``, ``kissat404``, ...), which must then be installed.
"""

from __future__ import annotations

import argparse
import sys

from packcolor.cnfio import SolveOutcome, Status, format_solver_output, load_dimacs
from packcolor.errors import ParseError


def _pysat_solve(path: str, backend: str) -> SolveOutcome:
    from pysat.solvers import Solver

    num_vars = None
    with Solver(name=backend) as solver, open(path) as fp:
        pending: list[int] = []
        for line in fp:
            if line.startswith("p"):
                num_vars = int(line.split()[2])
                continue
            if not line.strip() or line.startswith("c"):
                continue
            for tok in line.split():
                lit = int(tok)
                if lit:
                    pending.append(lit)
                else:
                    solver.add_clause(pending)
                    pending = []
        if num_vars is None:
            raise ParseError(f"{path}: no problem line")
        if not solver.solve():
            return SolveOutcome(Status.UNSAT)
        model = {v: False for v in range(1, num_vars + 1)}
        for lit in solver.get_model() or ():
            if abs(lit) <= num_vars:
                model[abs(lit)] = lit > 0
        return SolveOutcome(Status.SAT, model=model)


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="packcolor-sat", description=__doc__.splitlines()[0])
    parser.add_argument("--backend", default="cadical195")
    parser.add_argument("cnf")
    args = parser.parse_args(argv)

    if args.backend == "embedded":
        from packcolor.solver import Limits, solve_embedded

        outcome = solve_embedded(load_dimacs(args.cnf), Limits(max_vars=10**6))
    else:
        outcome = _pysat_solve(args.cnf, args.backend)
    sys.stdout.write(f"c packcolor-sat backend={args.backend}\n")
    sys.stdout.write(format_solver_output(outcome))
    sys.stdout.flush()
    return {Status.SAT: 10, Status.UNSAT: 20}.get(outcome.status, 0)


if __name__ == "__main__":
    sys.exit(main())
