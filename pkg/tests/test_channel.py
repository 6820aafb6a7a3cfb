import json

import numpy as np
import pytest

from qudit_teleport.channel import (
    SchmidtSpectrum,
    channel_state,
    decompose_channel,
    li_rank,
    nu_family,
    random_spectrum,
)
from qudit_teleport.core import bell_state
from qudit_teleport.errors import InvalidSpectrum, LinearlyDependentError


def test_spectrum_validation():
    with pytest.raises(InvalidSpectrum):
        SchmidtSpectrum((0.5, 0.5))
    with pytest.raises(InvalidSpectrum):
        SchmidtSpectrum((-0.6, 0.8))
    s = SchmidtSpectrum.from_amplitudes([3, 4], renormalize=True)
    assert s.coeffs == pytest.approx((0.6, 0.8))
    assert SchmidtSpectrum.from_json("[0.8, 0.6]").coeffs == (0.8, 0.6)  # order is kept
    assert json.loads(SchmidtSpectrum((0.6, 0.8)).to_json()) == [0.6, 0.8]


def test_channel_state_examples():
    np.testing.assert_allclose(channel_state(SchmidtSpectrum.maximal(2)).amps, bell_state(0, 0, 2).amps, atol=1e-15)
    np.testing.assert_array_equal(channel_state(SchmidtSpectrum((1.0, 0.0))).amps, [1, 0, 0, 0])
    assert channel_state(SchmidtSpectrum((0.6, 0.8))).amps[3] == 0.8


@pytest.mark.parametrize("d", [2, 3, 5])
def test_maximal_gram_is_identity(d):
    np.testing.assert_allclose(nu_family(SchmidtSpectrum.maximal(d)).gram, np.eye(d), atol=1e-12)


def test_qubit_overlap(qubit_spectrum):
    fam = nu_family(qubit_spectrum)
    assert fam.gram[0, 1] == pytest.approx(-0.28, abs=1e-12)
    np.testing.assert_allclose(np.diag(fam.gram), 1.0, atol=1e-12)
    for st in fam.states:
        assert st.norm == pytest.approx(1.0, abs=1e-10)


def test_gram_closed_form_and_circulant(rng):
    for _ in range(50):
        d = int(rng.integers(2, 7))
        s = random_spectrum(d, rng)
        fam = nu_family(s)
        direct = np.array([[np.vdot(a, b) for b in fam.vectors] for a in fam.vectors])
        np.testing.assert_allclose(fam.gram, direct, atol=1e-12)
        for n in range(d):
            for m in range(d):
                assert abs(fam.gram[n, m] - fam.gram[(n - m) % d, 0]) <= 1e-12
        if d == 2:
            assert abs(fam.gram[0, 1]) == pytest.approx(1 - 2 * s.a_min2, abs=1e-12)


def test_li_rank_examples():
    assert li_rank(SchmidtSpectrum((0.6, 0.8))) == (2, True)
    assert li_rank(SchmidtSpectrum((1.0, 0.0, 0.0))) == (1, False)
    assert li_rank(SchmidtSpectrum.from_squares((0.0, 0.4, 0.6))) == (2, False)


def test_decompose_examples(qubit_spectrum, qutrit_spectrum):
    dec = decompose_channel(SchmidtSpectrum.maximal(3))
    assert dec.weight_success == 1.0 and dec.degenerate
    dec = decompose_channel(qubit_spectrum)
    assert dec.weight_success == pytest.approx(0.72, abs=1e-12)
    assert dec.residual == pytest.approx((0.0, 1.0), abs=1e-12)
    dec = decompose_channel(qutrit_spectrum)
    assert dec.weight_success == pytest.approx(0.6, abs=1e-12)
    assert np.square(dec.residual) == pytest.approx([0.0, 0.25, 0.75], abs=1e-12)


def test_decompose_rejects_dependent():
    with pytest.raises(LinearlyDependentError) as info:
        decompose_channel(SchmidtSpectrum((0.0, 1.0)))
    assert info.value.zero_indices == (0,)


def test_decompose_reconstructs_spectrum(rng):
    for _ in range(50):
        d = int(rng.integers(2, 7))
        s = random_spectrum(d, rng)
        dec = decompose_channel(s)
        r = np.array(dec.residual)
        assert np.sum(r ** 2) == pytest.approx(1.0, abs=1e-10)
        assert np.min(r) == 0.0
        np.testing.assert_allclose(dec.weight_success / d + (1 - dec.weight_success) * r ** 2, s.squares, atol=1e-12)


def test_tied_minimum_gives_several_zeros():
    s = SchmidtSpectrum.from_squares((0.2, 0.2, 0.6))
    assert sum(x == 0.0 for x in decompose_channel(s).residual) == 2
