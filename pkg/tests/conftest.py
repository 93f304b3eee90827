import numpy as np
import pytest


def random_pure(n, rng):
    v = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    return v / np.linalg.norm(v)


def random_density(n, rng, rank=None):
    d = 2**n
    rank = rank or d
    a = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


def embed(op, n, targets):
    """Brute-force embedding by placing matrix elements at explicit basis indices.

    Independent of the engine's tensor contractions.
    """
    k = len(targets)
    d = 2**n
    full = np.zeros((d, d), dtype=complex)
    cols = np.arange(d)
    sub_in = np.zeros(d, dtype=int)
    base = cols.copy()
    for j, t in enumerate(targets):
        sub_in |= ((cols >> t) & 1) << j
        base &= ~(1 << t)
    for sub_out in range(2**k):
        rows = base.copy()
        for j, t in enumerate(targets):
            rows |= ((sub_out >> j) & 1) << t
        full[rows, cols] += op[sub_out, sub_in]
    return full


@pytest.fixture
def rng():
    return np.random.default_rng(20251015)


_acceptance_lines = []


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance: exit criteria with pinned tolerances")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if report.when == "call" and item.get_closest_marker("acceptance"):
        doc = (item.function.__doc__ or item.name).strip()
        status = "PASS" if report.passed else "FAIL"
        _acceptance_lines.append(f"{status}  {doc}  ({report.duration:.2f} s)")


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)
