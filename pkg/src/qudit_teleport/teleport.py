"""Standard and conclusive teleportation of a qudit.

Register layout: subsystem 0 is the receiver (particle 1), subsystem 1 the
sender's channel half (particle 2), subsystem 2 the input qudit (particle 3).
In the conclusive protocol particle 2 is embedded into ``2d`` dimensions before
the discrimination unitary; outcomes ``0..d-1`` are conclusive, ``d..2d-1``
inconclusive.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .channel import SchmidtSpectrum, channel_state
from .core import (
    NULL_PROBABILITY,
    StateVector,
    apply,
    apply_array,
    embed_subsystem,
    enumerate_branches,
    fourier,
    gxor,
    measure,
    phase_distance,
    x_power,
    z_power,
)
from .discrimination import DiscriminationPlan, build_unitary
from .errors import ShapeError


class CorrectionStrategy(str, enum.Enum):
    """Receiver action on inconclusive outcomes; conclusive ones are always fully corrected."""

    NONE = "none"
    X = "x"
    XZ = "xz"

    @classmethod
    def parse(cls, value) -> "CorrectionStrategy":
        if isinstance(value, cls):
            return value
        aliases = {"nocorrection": "none", "xonly": "x", "xandz": "xz"}
        key = str(value).lower().replace("_", "").replace("-", "")
        return cls(aliases.get(key, key))


@dataclass(frozen=True)
class ProtocolRun:
    input: StateVector
    branch_type: str  # "conclusive" or "inconclusive"
    index: int  # l for conclusive, s for inconclusive
    k: int
    probability: float
    output: Optional[StateVector]  # None for null branches
    fidelity: Optional[float]

    @property
    def conclusive(self) -> bool:
        return self.branch_type == "conclusive"

    def to_record(self) -> dict:
        return {
            "branch_type": self.branch_type,
            "l_or_s": self.index,
            "k": self.k,
            "probability": self.probability,
            "fidelity": self.fidelity,
        }


def correction_operator(d: int, outcome: int, k: int, strategy: CorrectionStrategy) -> np.ndarray:
    """Receiver correction for particle-2 outcome ``outcome`` (in ``0..2d-1``) and particle-3 outcome ``k``."""
    if outcome < d:
        return x_power(d, -k) @ z_power(d, outcome)
    s = outcome - d
    if strategy is CorrectionStrategy.NONE:
        return np.eye(d, dtype=np.complex128)
    if strategy is CorrectionStrategy.X:
        return x_power(d, -k)
    return z_power(d, s) @ x_power(d, -k)


def correction_table(d: int, strategy: CorrectionStrategy) -> np.ndarray:
    """Corrections for all ``2d * d`` branches, ordered by ``outcome * d + k``."""
    strategy = CorrectionStrategy.parse(strategy)
    return np.array([correction_operator(d, j, k, strategy) for j in range(2 * d) for k in range(d)])


def _check_input(psi: StateVector, d: int) -> None:
    if psi.dims != (d,):
        raise ShapeError(f"input state has dims {psi.dims}, expected ({d},)")


def evolve_amps(plan: DiscriminationPlan, psis: np.ndarray) -> np.ndarray:
    """Joint amplitudes after GXOR and the discrimination unitary.

    ``psis`` has shape ``(..., d)``; returns shape ``(..., d, 2d, d)``.
    """
    d = plan.d
    chan = np.diag(plan.spectrum.array).astype(np.complex128)
    joint = np.einsum("ij,...n->...ijn", chan, psis)
    batch = joint.shape[:-3]
    flat = apply_array(gxor(d), joint.reshape(batch + (d ** 3,)), (d, d, d), (1, 2))
    t = flat.reshape(batch + (d, d, d))
    pad = [(0, 0)] * len(batch) + [(0, 0), (0, d), (0, 0)]
    t = np.pad(t, pad)
    flat = apply_array(plan.unitary, t.reshape(batch + (2 * d * d * d,)), (d, 2 * d, d), (1,))
    return flat.reshape(batch + (d, 2 * d, d))


def prepare(s: SchmidtSpectrum, psi: StateVector, plan: DiscriminationPlan) -> StateVector:
    """Channel, GXOR on the sender's qudits, embedding and discrimination unitary."""
    d = s.d
    state = channel_state(s).tensor(psi)
    state = apply(gxor(d), state, (1, 2))
    state = embed_subsystem(state, 1, 2 * d)
    return apply(plan.unitary, state, (1,))


def _finish(psi, state, j, k, prob, d, strategy) -> ProtocolRun:
    branch_type = "conclusive" if j < d else "inconclusive"
    index = j if j < d else j - d
    if prob < NULL_PROBABILITY:
        return ProtocolRun(psi, branch_type, index, k, prob, None, None)
    receiver = state.as_tensor()[:, j, k]
    out = correction_operator(d, j, k, strategy) @ receiver
    out = out / np.linalg.norm(out)
    fid = abs(np.vdot(psi.amps, out)) ** 2
    return ProtocolRun(psi, branch_type, index, k, prob, StateVector(out, (d,)), float(fid))


def run_conclusive(
    s: SchmidtSpectrum,
    psi: StateVector,
    strategy,
    rng: np.random.Generator,
    plan: Optional[DiscriminationPlan] = None,
) -> ProtocolRun:
    """One sampled execution of conclusive teleportation."""
    s.require_li()
    _check_input(psi, s.d)
    strategy = CorrectionStrategy.parse(strategy)
    plan = plan or build_unitary(s)
    state = prepare(s, psi.normalized(), plan)
    m2 = measure(state, 1, rng)
    m3 = measure(m2.post_state, 2, rng)
    return _finish(psi, m3.post_state, m2.outcome, m3.outcome, m2.probability * m3.probability, s.d, strategy)


def enumerate_runs(
    s: SchmidtSpectrum,
    psi: StateVector,
    strategy,
    plan: Optional[DiscriminationPlan] = None,
    order: str = "23",
) -> List[ProtocolRun]:
    """Every measurement branch, ordered by (particle-2 outcome, particle-3 outcome).

    ``order="32"`` measures particle 3 first; the joint distribution is the same.
    """
    s.require_li()
    _check_input(psi, s.d)
    strategy = CorrectionStrategy.parse(strategy)
    plan = plan or build_unitary(s)
    d = s.d
    state = prepare(s, psi.normalized(), plan)
    first, second = (1, 2) if order == "23" else (2, 1)
    found = {}
    for r1 in enumerate_branches(state, first):
        if r1.post_state is None:
            for o in range(state.dims[second]):
                found[(r1.outcome, o)] = (0.0, None)
            continue
        for r2 in enumerate_branches(r1.post_state, second):
            found[(r1.outcome, r2.outcome)] = (r1.probability * r2.probability, r2.post_state)
    runs = []
    for j in range(2 * d):
        for k in range(d):
            key = (j, k) if order == "23" else (k, j)
            prob, post = found[key]
            if post is None:
                runs.append(_finish(psi, state, j, k, 0.0, d, strategy))
            else:
                runs.append(_finish(psi, post, j, k, prob, d, strategy))
    return runs


def _standard_state(d: int, psi: StateVector) -> StateVector:
    state = channel_state(SchmidtSpectrum.maximal(d)).tensor(psi.normalized())
    return apply(gxor(d), state, (1, 2))


def _standard_run(psi, state, l, k, prob, d) -> ProtocolRun:
    f = fourier(d)
    receiver = state.as_tensor()[:, :, k] @ f[:, l].conj()
    out = x_power(d, -k) @ z_power(d, l) @ receiver
    out = out / np.linalg.norm(out)
    fid = abs(np.vdot(psi.amps, out)) ** 2
    return ProtocolRun(psi, "conclusive", l, k, prob, StateVector(out, (d,)), float(fid))


def run_standard(d: int, psi: StateVector, rng: np.random.Generator) -> ProtocolRun:
    """Standard teleportation through the maximally entangled channel."""
    _check_input(psi, d)
    state = _standard_state(d, psi)
    m2 = measure(state, 1, rng, basis=fourier(d))
    m3 = measure(m2.post_state, 2, rng)
    return _standard_run(psi, m3.post_state, m2.outcome, m3.outcome, m2.probability * m3.probability, d)


def enumerate_standard(d: int, psi: StateVector) -> List[ProtocolRun]:
    _check_input(psi, d)
    state = _standard_state(d, psi)
    runs = []
    for r2 in enumerate_branches(state, 1, basis=fourier(d)):
        for r3 in enumerate_branches(r2.post_state, 2):
            runs.append(_standard_run(psi, r3.post_state, r2.outcome, r3.outcome, r2.probability * r3.probability, d))
    return runs


def conditional_state_check(
    s: SchmidtSpectrum, psi: StateVector, plan: Optional[DiscriminationPlan] = None
) -> dict:
    """Compare every pre-correction branch with its closed form.

    Shapes are compared up to normalization and global phase. The report also
    gives the ratio between simulated branch amplitudes and the nominal
    prefactors ``1/d`` (conclusive) and ``1/(d sqrt d)`` (inconclusive).
    """
    s.require_li()
    _check_input(psi, s.d)
    plan = plan or build_unitary(s)
    d = s.d
    psi_n = psi.normalized().amps
    t = evolve_amps(plan, psi_n)
    coeff = np.sqrt(d) * plan.phi  # coeff[l, s] multiplies Z^{-l} X^k on inconclusive slot s
    w = np.exp(2j * np.pi / d)
    shape_dev = 0.0
    x_form_dev = 0.0
    conclusive_ratio = []
    inconclusive_ratio = []
    inconclusive_mass = 0.0
    for k in range(d):
        xk = x_power(d, k) @ psi_n
        for l in range(d):
            expected = z_power(d, -l) @ xk
            got = t[:, l, k]
            shape_dev = max(shape_dev, phase_distance(got / np.linalg.norm(got), expected))
            conclusive_ratio.append(np.linalg.norm(got) / (1.0 / d))
        for sl in range(d):
            got = t[:, d + sl, k]
            nrm = np.linalg.norm(got)
            inconclusive_mass += nrm ** 2
            nominal = sum(coeff[l, sl] * (z_power(d, -l) @ xk) for l in range(d)) / (d * np.sqrt(d))
            if nrm ** 2 < NULL_PROBABILITY:
                continue
            shape_dev = max(shape_dev, phase_distance(got / nrm, nominal / np.linalg.norm(nominal)))
            inconclusive_ratio.append(nrm / np.linalg.norm(nominal))
            shifted = x_power(d, -k) @ got
            form = sum(coeff[l, sl] * w ** (-l * k) * (z_power(d, -l) @ psi_n) for l in range(d))
            x_form_dev = max(x_form_dev, phase_distance(shifted / nrm, form / np.linalg.norm(form)))
    return {
        "max_deviation": float(max(shape_dev, x_form_dev)),
        "branch_shape_deviation": float(shape_dev),
        "x_corrected_form_deviation": float(x_form_dev),
        "inconclusive_probability": float(inconclusive_mass),
        "conclusive_prefactor_ratio": float(np.mean(conclusive_ratio)),
        "inconclusive_prefactor_ratio": float(np.mean(inconclusive_ratio)) if inconclusive_ratio else None,
        "passed": bool(max(shape_dev, x_form_dev) <= 1e-9),
    }


def protocol_identity_deviation(s: SchmidtSpectrum, psi: StateVector, plan: Optional[DiscriminationPlan] = None) -> float:
    """Distance between the simulated state and the two-channel superposition form.

    The inconclusive block is Fourier-rotated so the residual channel appears
    in its Schmidt basis.
    """
    s.require_li()
    _check_input(psi, s.d)
    plan = plan or build_unitary(s)
    d = s.d
    psi_n = psi.normalized().amps
    rot = np.eye(2 * d, dtype=np.complex128)
    rot[d:, d:] = fourier(d)
    t = evolve_amps(plan, psi_n)
    t = apply_array(rot, t.reshape(-1), (d, 2 * d, d), (1,)).reshape(d, 2 * d, d)
    beta = s.residual_amplitudes
    sqrt_success = np.sqrt(d * s.a_min2)
    expected = np.zeros_like(t)
    for k in range(d):
        xk = x_power(d, k) @ psi_n
        for l in range(d):
            branch = z_power(d, -l) @ xk / d
            expected[:, l, k] += sqrt_success * branch
            nu_tilde = z_power(d, l) @ beta  # sqrt(1 - d A_min^2) already folded in
            expected[:, d:, k] += np.outer(branch, nu_tilde)
    return float(np.max(np.abs(t - expected)))
