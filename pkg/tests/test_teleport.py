import numpy as np
import pytest

from qudit_teleport.channel import SchmidtSpectrum, random_spectrum
from qudit_teleport.core import StateVector, basis_state, haar_state, x_power, z_power
from qudit_teleport.discrimination import build_unitary
from qudit_teleport.errors import LinearlyDependentError, ShapeError
from qudit_teleport.teleport import (
    CorrectionStrategy,
    conditional_state_check,
    enumerate_runs,
    enumerate_standard,
    evolve_amps,
    protocol_identity_deviation,
    run_conclusive,
    run_standard,
)

STRATEGIES = list(CorrectionStrategy)


def test_strategy_parsing():
    assert CorrectionStrategy.parse("NoCorrection") is CorrectionStrategy.NONE
    assert CorrectionStrategy.parse("XOnly") is CorrectionStrategy.X
    assert CorrectionStrategy.parse("xz") is CorrectionStrategy.XZ


def test_standard_qubit_basis_input():
    runs = enumerate_standard(2, basis_state(0, 2))
    assert len(runs) == 4
    assert all(r.fidelity == pytest.approx(1.0, abs=1e-10) for r in runs)


@pytest.mark.parametrize("d", [2, 3, 4])
def test_standard_uniform_branches(d, rng):
    runs = enumerate_standard(d, haar_state(d, rng))
    for r in runs:
        assert r.probability == pytest.approx(1 / d ** 2, abs=1e-10)
        assert r.fidelity == pytest.approx(1.0, abs=1e-10)
    assert run_standard(d, haar_state(d, rng), rng).fidelity == pytest.approx(1.0, abs=1e-10)


def test_standard_shape_error(rng):
    with pytest.raises(ShapeError):
        run_standard(3, haar_state(2, rng), rng)


@pytest.mark.parametrize("strategy", STRATEGIES)
def test_maximal_reduces_to_standard(strategy, rng):
    s = SchmidtSpectrum.maximal(3)
    runs = enumerate_runs(s, haar_state(3, rng), strategy)
    for r in runs:
        if r.conclusive:
            assert r.fidelity == pytest.approx(1.0, abs=1e-10)
        else:
            assert r.probability <= 1e-24 and r.output is None


def test_qubit_conclusive_mass(qubit_spectrum, rng):
    runs = enumerate_runs(qubit_spectrum, haar_state(2, rng), "xz")
    assert len(runs) == 8
    assert sum(r.probability for r in runs if r.conclusive) == pytest.approx(0.72, abs=1e-10)


def test_qubit_inconclusive_no_correction(qubit_spectrum):
    psi = basis_state(1, 2)
    runs = enumerate_runs(qubit_spectrum, psi, "none")
    # exact branch states: inconclusive operator is proportional to |1><1| X^k
    for r in runs:
        if r.conclusive or r.output is None:
            continue
        expected = 1.0 if r.k == 0 else 0.0
        assert 0.0 <= r.fidelity <= 1.0
        assert r.fidelity == pytest.approx(expected, abs=1e-12)


def test_qutrit_conclusive_mass(qutrit_spectrum, rng):
    runs = enumerate_runs(qutrit_spectrum, haar_state(3, rng), "x")
    assert sum(r.probability for r in runs if r.conclusive) == pytest.approx(0.6, abs=1e-10)


def test_enumeration_invariants(rng):
    for d in range(2, 7):
        for _ in range(20):
            s = random_spectrum(d, rng)
            plan = build_unitary(s)
            for _ in range(5):
                runs = enumerate_runs(s, haar_state(d, rng), "xz", plan)
                assert sum(r.probability for r in runs) == pytest.approx(1.0, abs=1e-10)
                assert sum(r.probability for r in runs if r.conclusive) == pytest.approx(d * s.a_min2, abs=1e-10)
                for r in runs:
                    if r.conclusive:
                        assert r.fidelity == pytest.approx(1.0, abs=1e-10)


def test_probabilities_independent_of_completion_order(qutrit_spectrum, rng):
    psi = haar_state(3, rng)
    a = enumerate_runs(qutrit_spectrum, psi, "x", build_unitary(qutrit_spectrum))
    b = enumerate_runs(qutrit_spectrum, psi, "x", build_unitary(qutrit_spectrum, completion_order=[5, 4, 3, 2, 1, 0]))
    np.testing.assert_allclose([r.probability for r in a], [r.probability for r in b], atol=1e-10)


def test_measurement_order_invariance(qutrit_spectrum, rng):
    psi = haar_state(3, rng)
    a = enumerate_runs(qutrit_spectrum, psi, "xz", order="23")
    b = enumerate_runs(qutrit_spectrum, psi, "xz", order="32")
    np.testing.assert_allclose([r.probability for r in a], [r.probability for r in b], atol=1e-12)
    np.testing.assert_allclose(
        [r.fidelity or 0.0 for r in a], [r.fidelity or 0.0 for r in b], atol=1e-12
    )


def test_sampled_frequencies_match_enumeration(qubit_spectrum):
    psi = StateVector(np.array([0.6, 0.8j]), (2,))
    plan = build_unitary(qubit_spectrum)
    runs = enumerate_runs(qubit_spectrum, psi, "xz", plan)
    probs = np.array([r.probability for r in runs])
    rng = np.random.default_rng(99)
    n = 20000
    counts = np.zeros(len(runs))
    for _ in range(n):
        r = run_conclusive(qubit_spectrum, psi, "xz", rng, plan)
        j = r.index if r.conclusive else r.index + 2
        counts[j * 2 + r.k] += 1
    freq = counts / n
    se = np.sqrt(probs * (1 - probs) / n)
    assert np.all(np.abs(freq - probs) <= 3 * se + 1e-12)



def test_conditional_states(rng):
    for _ in range(10):
        d = int(rng.integers(2, 6))
        s = random_spectrum(d, rng)
        rep = conditional_state_check(s, haar_state(d, rng))
        assert rep["max_deviation"] <= 1e-9
        # the nominal conclusive prefactor 1/d lacks the sqrt of the success probability
        assert rep["conclusive_prefactor_ratio"] == pytest.approx(np.sqrt(d * s.a_min2), abs=1e-12)
        assert rep["inconclusive_prefactor_ratio"] == pytest.approx(1.0, abs=1e-12)


def test_conditional_maximal_has_no_inconclusive(rng):
    rep = conditional_state_check(SchmidtSpectrum.maximal(3), haar_state(3, rng))
    assert rep["inconclusive_probability"] <= 1e-24
    assert rep["inconclusive_prefactor_ratio"] is None


def test_qubit_inconclusive_operator(qubit_spectrum, rng):
    psi = haar_state(2, rng)
    t = evolve_amps(build_unitary(qubit_spectrum), psi.amps)
    proj = np.diag([0, 1])
    for s in range(2):
        for k in range(2):
            got = t[:, 2 + s, k]
            want = proj @ x_power(2, k) @ psi.amps
            assert abs(abs(np.vdot(got, want)) - np.linalg.norm(got) * np.linalg.norm(want)) <= 1e-12


def test_protocol_identity(rng):
    for d in (2, 3, 4, 5):
        for _ in range(3):
            s = random_spectrum(d, rng)
            assert protocol_identity_deviation(s, haar_state(d, rng)) <= 1e-9
    assert protocol_identity_deviation(SchmidtSpectrum.maximal(3), haar_state(3, rng)) <= 1e-9


def test_dependent_spectrum_rejected(rng):
    with pytest.raises(LinearlyDependentError):
        enumerate_runs(SchmidtSpectrum((0.0, 1.0)), haar_state(2, rng), "x")


def test_record_schema(qubit_spectrum, rng):
    rec = run_conclusive(qubit_spectrum, haar_state(2, rng), "x", rng).to_record()
    assert set(rec) == {"branch_type", "l_or_s", "k", "probability", "fidelity"}


def test_correction_is_exact_inverse(rng):
    d = 4
    psi = haar_state(d, rng).amps
    for l in range(d):
        for k in range(d):
            out = x_power(d, -k) @ z_power(d, l) @ z_power(d, -l) @ x_power(d, k) @ psi
            np.testing.assert_allclose(out, psi, atol=1e-12)
