import numpy as np
import pytest

from qudit_teleport.channel import SchmidtSpectrum, random_spectrum


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def qubit_spectrum():
    return SchmidtSpectrum((0.6, 0.8))


@pytest.fixture
def qutrit_spectrum():
    return SchmidtSpectrum.from_squares((0.2, 0.3, 0.5))


def spectra(rng, dims, per_d):
    return [random_spectrum(d, rng) for d in dims for _ in range(per_d)]


_ACCEPTANCE_LINES = []


@pytest.fixture
def gate():
    """Record one PASS/FAIL line for an acceptance criterion and assert on it."""

    def record(label, ok, detail=""):
        line = f"{'PASS' if ok else 'FAIL'}  {label}: {detail}"
        _ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
