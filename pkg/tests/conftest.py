import contextlib
import time

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("ci", max_examples=200, derandomize=True, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow, HealthCheck.filter_too_much])
settings.load_profile("ci")

CRITERIA = {
    1: "square/disk John optimum and certificate",
    2: "Gaussian/interval John for s in {1/2, 1, 2}",
    3: "exponential/interval Loewner optimum",
    4: "classical recovery on cubes and the triangle",
    5: "randomized property suite",
    6: "separator soundness on feasible shrinks",
    7: "q-power certificate conversion",
    8: "random feasible positions never beat the optimum",
    9: "CLI determinism",
}
_results: dict = {}


@contextlib.contextmanager
def _record(n: int):
    """Parametrized parts of one criterion accumulate; any failing part fails the criterion."""
    t0 = time.perf_counter()
    ok, msg, dt = _results.get(n, (True, "", 0.0))
    try:
        yield
    except BaseException as exc:
        text = str(exc).splitlines()[0] if str(exc) else ""
        _results[n] = (False, msg or f"{type(exc).__name__}: {text}", dt + time.perf_counter() - t0)
        raise
    _results[n] = (ok, msg, dt + time.perf_counter() - t0)


@pytest.fixture
def criterion():
    """Context manager factory recording the outcome of an acceptance criterion."""
    return _record


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for n, desc in CRITERIA.items():
        if n not in _results:
            terminalreporter.write_line(f"acceptance criterion {n}: NOT RUN  {desc}")
            continue
        ok, msg, dt = _results[n]
        line = f"acceptance criterion {n}: {'PASS' if ok else 'FAIL'}  {desc}  ({dt:.1f} s)"
        terminalreporter.write_line(line + (f"  {msg}" if msg else ""))
