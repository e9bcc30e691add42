import numpy as np
import pytest

from gcm_ot.dynamics import GcmParams


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def params():
    return GcmParams(alpha=3.8, epsilon=0.3, n_elements=100)


def lattice_distribution(rng, n):
    """Random point of the 1/n lattice in the simplex, as integer numerators."""
    cuts = np.sort(rng.integers(0, n + 1, size=n - 1))
    counts = np.diff(np.concatenate([[0], cuts, [n]]))
    return counts / n


_CRITERIA: dict[str, tuple[bool, str]] = {}


def record_criterion(number, ok, detail):
    _CRITERIA[str(number)] = (bool(ok), detail)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_CRITERIA, key=lambda k: (int(k.rstrip("abcd")), k)):
        ok, detail = _CRITERIA[key]
        terminalreporter.write_line(f"criterion {key:<3} {'PASS' if ok else 'FAIL'}  {detail}")
