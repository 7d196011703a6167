"""``packcolor`` command line.

Exit codes (stable):
  0   SAT / valid coloring / brute force found a coloring
  1   verify: the coloring has violations
  10  solver answered UNKNOWN (timeout, budget, error)
  20  UNSAT / brute force exhausted
  64  usage error
  65  bad input data (grid file, plants, DIMACS, solver output)
  69  external solver unavailable
  70  integrity failure (a solver answer did not check out)
  75  refused: instance exceeds a size guard or needs --i-have-days
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Sequence

from packcolor.analysis import (
    FIXTURE_ALIASES,
    blow_up,
    brute_force_search,
    frequency,
    load_fixture,
    monotonicity_breaks,
    strip_colors,
    transpose,
)
from packcolor.cnfio import Status, decode_model, dump_dimacs, save_dimacs, varmap_comments
from packcolor.encoder import EncodeRequest, Scheme, default_group_size, encode
from packcolor.errors import (
    DecodeError,
    InputError,
    IntegrityError,
    ParseError,
    RefusalError,
    SolverEnvironmentError,
)
from packcolor.grid import Cell, Coloring, GridSpec, format_grid, read_grid, verify_packing, write_grid
from packcolor.solver import Limits, default_solver_command, solve_embedded, solve_portfolio

log = logging.getLogger("packcolor")

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_UNKNOWN = 10
EXIT_UNSAT = 20
EXIT_USAGE = 64
EXIT_DATA = 65
EXIT_NO_SOLVER = 69
EXIT_INTEGRITY = 70
EXIT_REFUSED = 75


@dataclass(frozen=True)
class Preset:
    """A named instance from the published experiments."""

    rows: int
    cols: int
    colors: int
    topology: str = "torus"
    plant_file: str | None = None
    strip_keep: int | None = None
    blowup: tuple[int, int] = (1, 1)
    plants: tuple[tuple[int, int, int], ...] = ()
    long_running: bool = False
    expected: str = ""


PRESETS = {
    "24x24-16(1-7)": Preset(24, 24, 16, plant_file="sh17", strip_keep=7, expected="unsat"),
    "48x48-16(1-8)": Preset(48, 48, 16, plant_file="sh17", strip_keep=8, blowup=(2, 2), expected="unsat"),
    "48x48-16(1-7)": Preset(48, 48, 16, plant_file="sh17", strip_keep=7, blowup=(2, 2), expected="sat"),
    "72x72-15(1-5)": Preset(72, 72, 15, plant_file="sh17", strip_keep=5, blowup=(3, 3), expected="sat"),
    "72x72-14(1-4)": Preset(72, 72, 14, plant_file="sh17", strip_keep=4, blowup=(3, 3), expected="unsat"),
    "lb-15x9-11": Preset(15, 9, 11, topology="plane", plants=((9, 5, 5),),
                         long_running=True, expected="unsat"),
    "lb-12x12-11": Preset(12, 12, 11, topology="plane", plants=((9, 6, 6),),
                          long_running=True, expected="unsat"),
    "lb-14x14-12": Preset(14, 14, 12, topology="plane", plants=((9, 7, 12),),
                          long_running=True, expected="unsat"),
}


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # usage errors exit 64 (EX_USAGE), not 2
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# -- argument helpers -----------------------------------------------------------

def parse_plant(text: str) -> tuple[int, int, int]:
    """``COLOR@ROW,COL`` -> ``(color, row, col)``, all 1-based."""
    try:
        color, where = text.split("@")
        row, col = where.split(",")
        return int(color), int(row), int(col)
    except ValueError:
        raise argparse.ArgumentTypeError(f"plant must look like COLOR@ROW,COL, got {text!r}") from None


def parse_factors(text: str) -> tuple[int, int]:
    try:
        if "x" in text.lower():
            r, c = text.lower().split("x")
            return int(r), int(c)
        return int(text), int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"factors must look like RxC, got {text!r}") from None


def load_grid_arg(name: str) -> Coloring:
    """A grid file path, or the name of a bundled fixture (sh17, ours16, ours15)."""
    path = Path(name)
    if path.exists():
        return read_grid(path)
    if name.lower() in FIXTURE_ALIASES or name.lower() in {f.value for f in FIXTURE_ALIASES.values()}:
        return load_fixture(name)
    raise InputError(f"{name!r} is neither a grid file nor a bundled fixture")


def _add_instance_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("instance")
    g.add_argument("--preset", choices=sorted(PRESETS), help="a named published instance")
    g.add_argument("--rows", type=int)
    g.add_argument("--cols", type=int)
    g.add_argument("--topology", choices=["torus", "plane"])
    g.add_argument("--colors", type=int, help="max color m")
    g.add_argument("--scheme", choices=["basic", "commander"], default="commander")
    g.add_argument("--group-size", type=int, help="commander group size (default: by m)")
    g.add_argument("--plant", type=parse_plant, action="append", default=[], metavar="COLOR@ROW,COL")
    g.add_argument("--plant-file", metavar="GRID", help="grid file or fixture name whose colors are planted")
    g.add_argument("--strip-keep", type=int, metavar="C", help="plant only colors <= C from --plant-file")
    g.add_argument("--blowup", type=parse_factors, metavar="RxC", help="tile the plant file before planting")
    g.add_argument("--transpose", action="store_true", help="transpose the plant grid after blow-up")


@dataclass
class Instance:
    request: EncodeRequest
    scheme: Scheme
    group_size: int | None
    description: dict[str, str]
    long_running: bool = False


def build_instance(args: argparse.Namespace) -> Instance:
    preset = PRESETS[args.preset] if args.preset else None
    rows = args.rows or (preset.rows if preset else None)
    cols = args.cols or (preset.cols if preset else None)
    colors = args.colors or (preset.colors if preset else None)
    topology = args.topology or (preset.topology if preset else "torus")
    plant_file = args.plant_file or (preset.plant_file if preset else None)
    strip_keep = args.strip_keep if args.strip_keep is not None else (preset.strip_keep if preset else None)
    factors = args.blowup or (preset.blowup if preset else (1, 1))
    extra = list(preset.plants if preset else ()) + list(args.plant)

    plants: Coloring | None = None
    if plant_file:
        plants = load_grid_arg(plant_file)
        if strip_keep is not None:
            plants = strip_colors(plants, strip_keep)
        if factors != (1, 1):
            plants = blow_up(plants, *factors)
        if args.transpose:
            plants = transpose(plants)
        rows = rows or plants.spec.rows
        cols = cols or plants.spec.cols
    if rows is None or cols is None or colors is None:
        raise InputError("need --rows, --cols and --colors (or a --preset / --plant-file)")
    spec = GridSpec(rows, cols, topology)
    assignment: dict[Cell, int] = {}
    if plants is not None:
        if (plants.spec.rows, plants.spec.cols) != (rows, cols):
            raise InputError(f"plant grid is {plants.spec.rows}x{plants.spec.cols}, instance is {rows}x{cols}")
        assignment.update(plants.assignment)
    for color, r, c in extra:
        cell = spec.check((r, c))
        if assignment.get(cell, color) != color:
            raise InputError(f"conflicting plants at {(r, c)}")
        assignment[cell] = color
    request = EncodeRequest(spec, colors, Coloring(spec, assignment))

    scheme = Scheme(args.scheme)
    group_size = None
    if scheme is Scheme.COMMANDER:
        group_size = args.group_size or default_group_size(colors)
    description = {
        "preset": args.preset or "",
        "rows": str(rows),
        "cols": str(cols),
        "topology": spec.topology.value,
        "colors": str(colors),
        "scheme": scheme.value,
        "group_size": str(group_size or ""),
        "plant_file": plant_file or "",
        "strip_keep": "" if strip_keep is None else str(strip_keep),
        "blowup": f"{factors[0]}x{factors[1]}",
        "transpose": str(bool(args.transpose)).lower(),
        "plants": str(len(assignment)),
    }
    return Instance(request, scheme, group_size, description, bool(preset and preset.long_running))


# -- commands -----------------------------------------------------------------------

def cmd_encode(args: argparse.Namespace) -> int:
    inst = build_instance(args)
    formula, varmap = encode(inst.request, inst.scheme, inst.group_size)
    comments = varmap_comments(varmap)
    if args.out:
        save_dimacs(args.out, formula, comments)
    else:
        dump_dimacs(formula, sys.stdout, comments)
    print(f"{varmap.summary()}: {formula.num_vars} variables, {formula.num_clauses} clauses, "
          f"{len(inst.request.plants)} planted cells", file=sys.stderr)
    return EXIT_OK


def _write_manifest(path: Path, fields: dict[str, str]) -> None:
    lines = [f"{k}={str(v).replace(chr(10), ' ')}" for k, v in fields.items()]
    path.write_text("\n".join(lines) + "\n")


def cmd_solve(args: argparse.Namespace) -> int:
    inst = build_instance(args)
    if inst.long_running and not args.i_have_days:
        raise RefusalError(f"preset {args.preset} took hours to days in the original experiments; "
                           "pass --i-have-days to run it anyway (or use 'encode' to just emit it)")
    started = datetime.now(timezone.utc)
    formula, varmap = encode(inst.request, inst.scheme, inst.group_size)
    log.info("%s: %d vars, %d clauses", varmap.summary(), formula.num_vars, formula.num_clauses)

    manifest = {"command": "solve", "started": started.isoformat(timespec="seconds"), **inst.description,
                "num_vars": str(formula.num_vars), "num_clauses": str(formula.num_clauses)}
    manifest_path = Path(args.manifest)

    if args.cnf_out:
        save_dimacs(args.cnf_out, formula, varmap_comments(varmap))
        manifest["dimacs_path"] = str(args.cnf_out)

    try:
        if args.solver == "embedded":
            outcome = solve_embedded(formula, Limits(max_vars=args.max_vars, max_conflicts=args.max_conflicts))
            manifest["portfolio"] = "1"
        else:
            commands = args.solver_command or [default_solver_command()]
            if len(commands) == 1 and args.portfolio > 1:
                commands = commands * args.portfolio
            manifest["portfolio"] = str(len(commands))
            outcome = solve_portfolio(formula, commands, args.timeout, varmap_comments(varmap))
    except Exception as exc:
        manifest.update(status="error", reason=f"{type(exc).__name__}: {exc}",
                        finished=datetime.now(timezone.utc).isoformat(timespec="seconds"))
        _write_manifest(manifest_path, manifest)
        raise

    manifest.update(solver_id=outcome.solver_id, status=outcome.status.value,
                    wall_time=f"{outcome.wall_time:.3f}")
    if outcome.reason:
        manifest["reason"] = outcome.reason

    code = {Status.SAT: EXIT_OK, Status.UNSAT: EXIT_UNSAT, Status.UNKNOWN: EXIT_UNKNOWN}[outcome.status]
    try:
        if outcome.is_sat:
            coloring = decode_model(outcome.model, varmap, inst.request.plants)
            verdict = verify_packing(coloring)
            agrees = all(coloring.get(c) == k for c, k in inst.request.plants.assignment.items())
            if not verdict.valid or not agrees:
                raise IntegrityError(f"decoded coloring failed verification "
                                     f"({len(verdict.violations)} violations, plants kept: {agrees})")
            manifest["verified"] = "true"
            manifest["max_color_used"] = str(coloring.max_color())
            if args.out_grid:
                write_grid(args.out_grid, coloring)
                manifest["grid_path"] = str(args.out_grid)
            elif not args.quiet:
                sys.stdout.write(format_grid(coloring))
    except (IntegrityError, DecodeError) as exc:
        manifest.update(verified="false", status="error", reason=str(exc))
        raise
    finally:
        manifest["finished"] = datetime.now(timezone.utc).isoformat(timespec="seconds")
        _write_manifest(manifest_path, manifest)

    print(f"status: {outcome.status.value}", file=sys.stderr)
    if outcome.is_sat:
        print("verified: true", file=sys.stderr)
    if args.preset:
        print(f"published status: {PRESETS[args.preset].expected}", file=sys.stderr)
    print(f"manifest: {manifest_path}", file=sys.stderr)
    return code


def cmd_verify(args: argparse.Namespace) -> int:
    coloring = load_grid_arg(args.grid)
    verdict = verify_packing(coloring)
    for v in verdict.violations[: args.limit]:
        print(f"violation: color {v.color} at {tuple(v.first)} and {tuple(v.second)}, distance {v.distance}")
    if len(verdict.violations) > args.limit:
        print(f"... {len(verdict.violations) - args.limit} more")
    kind = "total" if coloring.is_total else "partial"
    print(f"{'valid' if verdict.valid else 'INVALID'}: {kind} coloring on "
          f"{coloring.spec.rows}x{coloring.spec.cols} {coloring.spec.topology.value}, "
          f"{len(coloring)} cells, max color {coloring.max_color()}, "
          f"{len(verdict.violations)} violations")
    return EXIT_OK if verdict.valid else EXIT_INVALID


def cmd_freq(args: argparse.Namespace) -> int:
    table = frequency(load_grid_arg(args.grid))
    sys.stdout.write(table.format())
    try:
        breaks = monotonicity_breaks(table)
    except InputError as exc:
        print(f"monotone: n/a ({exc})")
        return EXIT_OK
    print(f"monotone: {str(not breaks).lower()}")
    if breaks:
        print("breaks: " + ", ".join(f"{a}->{b}" for a, b in breaks))
    return EXIT_OK


def cmd_blowup(args: argparse.Namespace) -> int:
    coloring = load_grid_arg(args.grid)
    if args.strip_keep is not None:
        coloring = strip_colors(coloring, args.strip_keep)
    coloring = blow_up(coloring, *args.factors)
    if args.transpose:
        coloring = transpose(coloring)
    if args.out:
        write_grid(args.out, coloring)
    else:
        sys.stdout.write(format_grid(coloring))
    return EXIT_OK


def cmd_oracle(args: argparse.Namespace) -> int:
    spec = GridSpec(args.rows, args.cols, args.topology)
    plants = Coloring(spec, {(r, c): k for k, r, c in args.plant})
    result = brute_force_search(spec, args.colors, plants, max_nodes=args.max_nodes)
    if result.found:
        sys.stdout.write(format_grid(result.coloring))
        print(f"found after {result.nodes} nodes", file=sys.stderr)
        return EXIT_OK
    print(f"exhausted after {result.nodes} nodes: no packing {args.colors}-coloring", file=sys.stderr)
    return EXIT_UNSAT


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="packcolor", description="Packing colorings of grids via SAT.",
                     formatter_class=argparse.RawDescriptionHelpFormatter, epilog=__doc__)
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("encode", help="write a DIMACS instance")
    _add_instance_args(p)
    p.add_argument("--out", type=Path, help="output path (default stdout)")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("solve", help="encode, solve, decode and verify")
    _add_instance_args(p)
    p.add_argument("--solver", choices=["embedded", "external"], default="external")
    p.add_argument("--solver-command", action="append",
                   help="external solver command (repeatable); default $PACKCOLOR_SOLVER")
    p.add_argument("--portfolio", type=int, default=1, help="run N copies, first definitive answer wins")
    p.add_argument("--timeout", type=float, default=24 * 3600.0, help="seconds (external solvers)")
    p.add_argument("--max-vars", type=int, default=Limits().max_vars)
    p.add_argument("--max-conflicts", type=int)
    p.add_argument("--out-grid", type=Path, help="write the verified coloring here")
    p.add_argument("--cnf-out", type=Path, help="also keep the DIMACS instance")
    p.add_argument("--manifest", default="packcolor-run.manifest")
    p.add_argument("--quiet", action="store_true", help="do not print the coloring")
    p.add_argument("--i-have-days", action="store_true", help="allow the multi-day lower-bound presets")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify", help="check a grid file (or fixture) is a packing coloring")
    p.add_argument("grid")
    p.add_argument("--limit", type=int, default=20, help="max violations to print")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("freq", help="color frequency table and monotonicity")
    p.add_argument("grid")
    p.set_defaults(func=cmd_freq)

    p = sub.add_parser("blowup", help="tile a toroidal grid")
    p.add_argument("grid")
    p.add_argument("factors", type=parse_factors, metavar="RxC")
    p.add_argument("--strip-keep", type=int)
    p.add_argument("--transpose", action="store_true")
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_blowup)

    p = sub.add_parser("oracle", help="brute-force search on a tiny grid")
    p.add_argument("--rows", type=int, required=True)
    p.add_argument("--cols", type=int, required=True)
    p.add_argument("--topology", choices=["torus", "plane"], default="torus")
    p.add_argument("--colors", type=int, required=True)
    p.add_argument("--plant", type=parse_plant, action="append", default=[], metavar="COLOR@ROW,COL")
    p.add_argument("--max-nodes", type=int)
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * args.verbose, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (InputError, ParseError) as exc:
        print(f"packcolor: {exc}", file=sys.stderr)
        return EXIT_DATA
    except SolverEnvironmentError as exc:
        print(f"packcolor: {exc}", file=sys.stderr)
        return EXIT_NO_SOLVER
    except (IntegrityError, DecodeError) as exc:
        print(f"packcolor: integrity failure: {exc}", file=sys.stderr)
        return EXIT_INTEGRITY
    except RefusalError as exc:
        print(f"packcolor: {exc}", file=sys.stderr)
        return EXIT_REFUSED


if __name__ == "__main__":
    sys.exit(main())
