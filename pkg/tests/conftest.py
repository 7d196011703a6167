import importlib.util
import shlex
import sys
import time

import pytest

HAVE_PYSAT = importlib.util.find_spec("pysat") is not None


def pytest_addoption(parser):
    parser.addoption("--run-reproductions", action="store_true", default=False,
                     help="run the hours-long external-solver reproductions of the published runs table")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--run-reproductions"):
        return
    skip = pytest.mark.skip(reason="published-run reproduction; opt in with --run-reproductions")
    for item in items:
        if "reproduction" in item.keywords:
            item.add_marker(skip)


def shim_command(backend: str) -> str:
    return f"{shlex.quote(sys.executable)} -m packcolor.shim --backend {backend}"


@pytest.fixture
def embedded_command():
    """An external-solver command backed by the embedded DPLL, always available."""
    return shim_command("embedded")


@pytest.fixture
def pysat_command():
    if not HAVE_PYSAT:
        pytest.skip("python-sat not installed")
    return shim_command("cadical195")


_criterion_lines: list[str] = []


class Criterion:
    def __init__(self, number: int, title: str, budget: float | None):
        self.number, self.title, self.budget = number, title, budget
        self.elapsed = 0.0

    def __enter__(self):
        self._start = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc, tb):
        self.elapsed = time.perf_counter() - self._start
        over = self.budget is not None and self.elapsed > self.budget
        ok = exc_type is None and not over
        budget = f" (budget {self.budget:g}s)" if self.budget is not None else ""
        detail = "" if exc_type is None else f" [{exc_type.__name__}]"
        if exc_type is None and over:
            detail = " [over time budget]"
        line = f"criterion {self.number}: {'PASS' if ok else 'FAIL'} {self.title} {self.elapsed:.2f}s{budget}{detail}"
        _criterion_lines.append(line)
        print(line)
        if exc_type is None and over:
            raise AssertionError(f"criterion {self.number} took {self.elapsed:.2f}s, budget {self.budget:g}s")
        return False


@pytest.fixture
def criterion():
    return Criterion


def pytest_terminal_summary(terminalreporter):
    lines = list(_criterion_lines)
    for report in terminalreporter.stats.get("skipped", []):
        name = report.nodeid.rsplit("::", 1)[-1]
        if name.startswith("test_criterion_"):
            number = name.split("_")[2]
            lines.append(f"criterion {number}: SKIP {name} ({report.longrepr[-1]})")
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda l: int(l.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
