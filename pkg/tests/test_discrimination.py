import numpy as np
import pytest

from qudit_teleport.channel import SchmidtSpectrum, nu_family, random_spectrum
from qudit_teleport.core import fourier
from qudit_teleport.discrimination import (
    build_unitary,
    feasibility_oracle,
    feasibility_search,
    optimal_failure,
    phi_states,
    q_matrix,
)
from qudit_teleport.errors import LinearlyDependentError, OracleUnsupported, UnsupportedPriors


def test_optimal_failure_examples(qubit_spectrum, qutrit_spectrum):
    assert optimal_failure(SchmidtSpectrum.maximal(4)) == pytest.approx(0.0, abs=1e-12)
    assert optimal_failure(qubit_spectrum) == pytest.approx(0.28, abs=1e-12)
    assert optimal_failure(qutrit_spectrum) == pytest.approx(0.4, abs=1e-12)
    with pytest.raises(LinearlyDependentError):
        optimal_failure(SchmidtSpectrum((1.0, 0.0)))


def test_qubit_failure_equals_overlap(qubit_spectrum):
    # the two-state optimum equals |<nu_0|nu_1>|
    assert optimal_failure(qubit_spectrum) == pytest.approx(abs(nu_family(qubit_spectrum).gram[0, 1]), abs=1e-12)


def test_q_matrix_examples(qutrit_spectrum, rng):
    np.testing.assert_allclose(q_matrix(qutrit_spectrum, np.zeros(3)), nu_family(qutrit_spectrum).gram)
    np.testing.assert_allclose(q_matrix(SchmidtSpectrum.maximal(3), np.ones(3)), 0, atol=1e-12)
    for _ in range(10):
        s = random_spectrum(int(rng.integers(2, 6)), rng)
        f = rng.random()
        q = q_matrix(s, np.full(s.d, 1 - f))
        np.testing.assert_allclose(q, q.conj().T, atol=1e-12)
        fq = fourier(s.d) @ q @ fourier(s.d).conj().T
        np.testing.assert_allclose(fq, np.diag(f - 1 + s.d * s.squares), atol=1e-10)


def test_q_psd_at_optimum_and_tight(rng):
    for _ in range(30):
        s = random_spectrum(int(rng.integers(2, 6)), rng)
        succ = 1 - optimal_failure(s)
        eig = np.linalg.eigvalsh(q_matrix(s, np.full(s.d, succ)))
        assert -1e-10 <= eig[0] <= 1e-8
        past = np.linalg.eigvalsh(q_matrix(s, np.full(s.d, min(succ + 0.01, 1.0))))
        assert past[0] < -1e-6


def test_phi_examples(qubit_spectrum, rng):
    np.testing.assert_allclose(phi_states(SchmidtSpectrum.maximal(3)), 0, atol=1e-15)
    phi = phi_states(qubit_spectrum)
    np.testing.assert_allclose(np.sum(np.abs(phi) ** 2, axis=1), [0.28, 0.28], atol=1e-12)
    for _ in range(20):
        s = random_spectrum(int(rng.integers(2, 6)), rng)
        phi = phi_states(s)
        gram_phi = phi.conj() @ phi.T
        np.testing.assert_allclose(gram_phi, q_matrix(s, np.full(s.d, 1 - optimal_failure(s))), atol=1e-10)
        assert np.linalg.matrix_rank(gram_phi, tol=1e-9) <= s.d - 1


def test_oracle_examples(qubit_spectrum):
    assert feasibility_oracle(SchmidtSpectrum.maximal(2), 0.01) <= 0.01
    failure, point = feasibility_search(qubit_spectrum, 0.005)
    assert failure == pytest.approx(0.28, abs=0.01)
    assert abs(point[0] - point[1]) <= 0.005


def test_oracle_agrees_with_closed_form(rng):
    for d, res in ((2, 0.005), (3, 0.01)):
        for _ in range(3):
            s = random_spectrum(d, rng)
            gap = feasibility_oracle(s, res) - optimal_failure(s)
            assert -1e-9 <= gap < res * d


def test_oracle_limits():
    with pytest.raises(OracleUnsupported):
        feasibility_oracle(SchmidtSpectrum.maximal(5), 0.1)


def test_plan_invariants(rng):
    for _ in range(20):
        d = int(rng.integers(2, 5))
        s = random_spectrum(d, rng)
        plan = build_unitary(s)
        assert plan.unitarity_residual <= 1e-10
        assert 0 <= plan.failure <= 1 and plan.success == pytest.approx(1 - plan.failure)
        np.testing.assert_allclose(np.sum(np.abs(plan.phi) ** 2, axis=1), plan.failure, atol=1e-10)
        mapped = plan.unitary @ plan.embed @ nu_family(s).vectors.T
        np.testing.assert_allclose(mapped, plan.targets(), atol=1e-10)
        conclusive = np.abs(mapped[:d]) ** 2
        assert np.max(conclusive - np.diag(np.diag(conclusive))) <= 1e-20


def test_maximal_plan_is_inverse_fourier():
    plan = build_unitary(SchmidtSpectrum.maximal(3))
    np.testing.assert_allclose(plan.unitary[:3, :3], fourier(3).conj().T, atol=1e-12)
    np.testing.assert_allclose(plan.unitary[3:, :3], 0, atol=1e-12)


def test_qubit_plan_statistics(qubit_spectrum):
    plan = build_unitary(qubit_spectrum)
    out = plan.unitary @ plan.embed @ nu_family(qubit_spectrum).vectors[0]
    probs = np.abs(out) ** 2
    assert probs[0] == pytest.approx(0.72, abs=1e-12)
    assert probs[1] <= 1e-20


def test_completion_order_does_not_change_mapping(qutrit_spectrum):
    a = build_unitary(qutrit_spectrum)
    b = build_unitary(qutrit_spectrum, completion_order=[5, 3, 1, 4, 0, 2])
    np.testing.assert_allclose(a.unitary[:, :3], b.unitary[:, :3], atol=1e-12)
    assert b.unitarity_residual <= 1e-10


def test_nonuniform_priors_rejected(qubit_spectrum):
    with pytest.raises(UnsupportedPriors):
        build_unitary(qubit_spectrum, priors=[0.3, 0.7])


def _brute_force(s, resolution):
    import itertools

    n = int(np.floor(1.0 / resolution + 1e-9))
    gram = nu_family(s).gram
    best = None
    for idx in itertools.product(range(n + 1), repeat=s.d):
        p = np.minimum(np.array(idx) * resolution, 1.0)
        if np.linalg.eigvalsh(gram - np.diag(p))[0] >= -1e-10 and (best is None or sum(idx) > sum(best)):
            best = idx  # product() walks in lexicographic order, so the first maximum is kept
    return np.minimum(np.array(best) * resolution, 1.0)


@pytest.mark.parametrize("d, resolution", [(2, 0.02), (3, 0.1)])
def test_binary_search_matches_brute_force(d, resolution, rng):
    for _ in range(3):
        s = random_spectrum(d, rng)
        _, point = feasibility_search(s, resolution)
        np.testing.assert_allclose(point, _brute_force(s, resolution), atol=1e-12)


def test_oracle_degenerate_minimum():
    s = SchmidtSpectrum.from_squares((0.2, 0.2, 0.6))
    assert optimal_failure(s) == pytest.approx(0.4, abs=1e-12)
    assert abs(feasibility_oracle(s, 0.005) - optimal_failure(s)) <= 0.01
    plan = build_unitary(s)
    assert plan.unitarity_residual <= 1e-10
