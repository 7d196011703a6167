import itertools
import random
import sys
import time

import pytest

from packcolor.analysis import brute_force_search
from packcolor.cnfio import Status, decode_model
from packcolor.encoder import CnfFormula, EncodeRequest, encode_basic, encode_commander
from packcolor.errors import IntegrityError, ParseError, RefusalError, SolverEnvironmentError
from packcolor.grid import GridSpec, verify_packing
from packcolor.solver import (
    Limits,
    enumerate_models,
    solve_embedded,
    solve_external,
    solve_portfolio,
)


def truth_table(formula):
    n = formula.num_vars
    models = []
    for bits in itertools.product([False, True], repeat=n):
        model = dict(zip(range(1, n + 1), bits))
        if formula.satisfied_by(model) is None:
            models.append(model)
    return models


def random_formula(rng, max_vars=12, max_clauses=50):
    n = rng.randint(1, max_vars)
    clauses = []
    for _ in range(rng.randint(0, max_clauses)):
        width = rng.randint(1, min(4, n))
        vs = rng.sample(range(1, n + 1), width)
        clauses.append([v if rng.random() < 0.5 else -v for v in vs])
    return CnfFormula(n, clauses)


def test_empty_formula_is_sat():
    out = solve_embedded(CnfFormula(0))
    assert out.status is Status.SAT and out.model == {}


@pytest.mark.parametrize("clauses, status", [([[1]], Status.SAT), ([[1], [-1]], Status.UNSAT),
                                             ([[1, 2], [-1], [-2]], Status.UNSAT)])
def test_tiny(clauses, status):
    assert solve_embedded(CnfFormula(2, clauses)).status is status


def test_3x3_one_color_unsat():
    formula, _ = encode_basic(EncodeRequest(GridSpec(3, 3), 1))
    assert truth_table(formula) == []
    assert solve_embedded(formula).is_unsat


def test_2x2_three_colors_sat():
    formula, varmap = encode_basic(EncodeRequest(GridSpec(2, 2), 3))
    assert brute_force_search(GridSpec(2, 2), 3).found
    out = solve_embedded(formula)
    assert out.is_sat
    assert verify_packing(decode_model(out.model, varmap)).valid


def test_embedded_agrees_with_truth_table():
    rng = random.Random(7)
    for _ in range(300):
        formula = random_formula(rng)
        expected = bool(truth_table(formula))
        out = solve_embedded(formula)
        assert out.is_sat == expected
        if out.is_sat:
            assert formula.satisfied_by(out.model) is None


def test_embedded_handles_duplicate_and_tautological_clauses():
    formula = CnfFormula(2, [[1, 1, -2], [2, -2], [-1]])
    out = solve_embedded(formula)
    assert out.is_sat and out.model[1] is False and out.model[2] is False


def test_refuses_large_formula():
    with pytest.raises(RefusalError, match="external"):
        solve_embedded(CnfFormula(6000, [[1]]))
    with pytest.raises(RefusalError):
        enumerate_models(CnfFormula(10, [[1]]), [1], Limits(max_vars=5))


def test_conflict_budget_gives_unknown():
    formula, _ = encode_basic(EncodeRequest(GridSpec(4, 4), 6))
    out = solve_embedded(formula, Limits(max_conflicts=3))
    assert out.status is Status.UNKNOWN
    assert "budget" in out.reason


# -- enumeration ------------------------------------------------------------------------------

def test_enumerate_truth_table():
    assert enumerate_models(CnfFormula(2, [[1, 2]]), [1, 2]) == [
        {1: False, 2: True}, {1: True, 2: False}, {1: True, 2: True}]


def test_enumerate_unsat():
    assert enumerate_models(CnfFormula(1, [[1], [-1]]), [1]) == []


def test_enumerate_empty_projection():
    assert enumerate_models(CnfFormula(2, [[1, 2]]), []) == [{}]


def test_enumerate_matches_truth_table_projection():
    rng = random.Random(11)
    for _ in range(150):
        formula = random_formula(rng, max_vars=9, max_clauses=20)
        proj = sorted(rng.sample(range(1, formula.num_vars + 1), rng.randint(0, formula.num_vars)))
        expected = sorted({tuple(m[v] for v in proj) for m in truth_table(formula)})
        got = enumerate_models(formula, proj)
        assert [tuple(m[v] for v in proj) for m in got] == expected


def test_enumerate_basic_vs_commander_2x2():
    req = EncodeRequest(GridSpec(2, 2), 2)
    basic, bmap = encode_basic(req)
    cmd, cmap = encode_commander(req, 2)
    assert enumerate_models(basic, bmap.position_vars()) == enumerate_models(cmd, cmap.position_vars())


# -- external -----------------------------------------------------------------------------------

def test_external_sat_unsat(embedded_command):
    out = solve_external(CnfFormula(1, [[1]]), embedded_command, timeout=60)
    assert out.is_sat and out.model == {1: True}
    assert solve_external(CnfFormula(1, [[1], [-1]]), embedded_command, timeout=60).is_unsat


def test_external_uses_env_default(monkeypatch, embedded_command):
    monkeypatch.setenv("PACKCOLOR_SOLVER", embedded_command)
    assert solve_external(CnfFormula(1, [[1]]), timeout=60).is_sat


def test_external_missing_env(monkeypatch):
    monkeypatch.delenv("PACKCOLOR_SOLVER", raising=False)
    with pytest.raises(SolverEnvironmentError):
        solve_external(CnfFormula(1, [[1]]), timeout=60)


def test_external_spawn_failure():
    with pytest.raises(SolverEnvironmentError):
        solve_external(CnfFormula(1, [[1]]), "/nonexistent/solver-binary", timeout=10)


def _script(tmp_path, name, body):
    path = tmp_path / name
    path.write_text(f"import sys\n{body}\n")
    return f"{sys.executable} {path}"


def test_external_lying_solver_is_caught(tmp_path):
    liar = _script(tmp_path, "liar.py", "print('s SATISFIABLE'); print('v -1 0'); sys.exit(10)")
    with pytest.raises(IntegrityError):
        solve_external(CnfFormula(1, [[1]]), liar, timeout=30)


def test_external_garbled_model(tmp_path):
    bad = _script(tmp_path, "bad.py", "print('s SATISFIABLE'); print('v 1 2 0')")
    with pytest.raises(ParseError):
        solve_external(CnfFormula(1, [[1]]), bad, timeout=30)


def test_external_exit_code_ignored(tmp_path):
    odd = _script(tmp_path, "odd.py", "print('s UNSATISFIABLE'); sys.exit(3)")
    assert solve_external(CnfFormula(1, [[1]]), odd, timeout=30).is_unsat


def test_external_silent_solver_unknown(tmp_path):
    quiet = _script(tmp_path, "quiet.py", "sys.exit(1)")
    out = solve_external(CnfFormula(1, [[1]]), quiet, timeout=30)
    assert out.status is Status.UNKNOWN and "malformed" in out.reason


def test_timeout_is_enforced(tmp_path):
    sleeper = _script(tmp_path, "sleeper.py", "import time; time.sleep(60)")
    start = time.perf_counter()
    out = solve_external(CnfFormula(1, [[1]]), sleeper, timeout=1.0)
    assert out.status is Status.UNKNOWN and "timeout" in out.reason
    assert time.perf_counter() - start < 1.0 + 3.0


def test_portfolio_first_definitive_wins(tmp_path, embedded_command):
    sleeper = _script(tmp_path, "sleeper.py", "import time; time.sleep(60)")
    start = time.perf_counter()
    out = solve_portfolio(CnfFormula(1, [[1], [-1]]), [sleeper, embedded_command], timeout=60)
    assert out.is_unsat
    assert out.solver_id.endswith("#1")
    assert time.perf_counter() - start < 30


def test_portfolio_skips_unknown_member(tmp_path, embedded_command):
    quiet = _script(tmp_path, "quiet.py", "print('s UNKNOWN')")
    out = solve_portfolio(CnfFormula(1, [[1]]), [quiet, embedded_command], timeout=60)
    assert out.is_sat


@pytest.mark.slow
def test_embedded_vs_pysat_random(pysat_command):
    rng = random.Random(2024)
    for _ in range(200):
        formula = random_formula(rng, max_vars=60, max_clauses=260)
        assert solve_embedded(formula).status is solve_external(formula, pysat_command, timeout=60).status


@pytest.mark.slow
def test_embedded_vs_pysat_encodings(pysat_command):
    for rows, cols in itertools.product(range(1, 5), repeat=2):
        for m in range(1, 8):
            formula, _ = encode_commander(EncodeRequest(GridSpec(rows, cols), m))
            assert solve_embedded(formula).status is solve_external(formula, pysat_command, timeout=60).status
