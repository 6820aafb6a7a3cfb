"""Average teleportation fidelities: closed forms, exact Haar averages and Monte Carlo.

The exact evaluator uses the second-moment identity
``E_psi[<psi|K|psi><psi|K^dag|psi>] = (|tr K|^2 + tr(K^dag K)) / (d (d + 1))``
on the per-branch receiver maps ``K`` extracted from the simulated protocol.
"""
from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from . import kernels
from .channel import SchmidtSpectrum
from .core import haar_amps
from .discrimination import DiscriminationPlan, build_unitary
from .errors import InvalidCoefficients
from .teleport import CorrectionStrategy, correction_table, evolve_amps

MC_BLOCK = 512


def f0(s: SchmidtSpectrum) -> float:
    """Average fidelity when inconclusive outcomes are left uncorrected."""
    s.require_li()
    return 1.0 / s.d + (s.d - 1) * s.a_min2


def f1(s: SchmidtSpectrum) -> float:
    """Average fidelity with the ``X^{d-k}`` correction on inconclusive outcomes."""
    s.require_li()
    d = s.d
    return (2.0 + d * (d - 1) * s.a_min2) / (d + 1)


def f2(s: SchmidtSpectrum) -> float:
    """Average fidelity with ``X^{d-k}`` followed by ``Z^s`` on inconclusive outcomes."""
    beta = s.residual_amplitudes
    cross = beta.sum() ** 2 - (beta ** 2).sum()  # sum over ordered pairs n != r
    return f1(s) + max(float(cross), 0.0) / (s.d + 1)


def analytic(s: SchmidtSpectrum, strategy) -> float:
    strategy = CorrectionStrategy.parse(strategy)
    return {CorrectionStrategy.NONE: f0, CorrectionStrategy.X: f1, CorrectionStrategy.XZ: f2}[strategy](s)


class BanaszekVariant(str, enum.Enum):
    CORRECTED = "corrected"
    AS_WRITTEN = "as_written"


def banaszek_bound(t: Sequence[float], variant=BanaszekVariant.CORRECTED) -> float:
    """Optimal average fidelity through ``sum_k t_k |kk>``.

    ``AS_WRITTEN`` flips the sign in front of ``(sum t)^2``; it is not a valid bound and is
    only meant for discrepancy reports.
    """
    t = np.asarray(t, dtype=float)
    if t.ndim != 1 or t.size < 2 or np.any(t < 0):
        raise InvalidCoefficients("coefficients must be a list of at least two nonnegative reals")
    if abs(float(np.sum(t ** 2)) - 1.0) > 1e-9:
        raise InvalidCoefficients(f"squared coefficients sum to {float(np.sum(t ** 2))!r}, expected 1")
    d = t.size
    total2 = float(np.sum(t)) ** 2
    if BanaszekVariant(variant) is BanaszekVariant.CORRECTED:
        return (1.0 + total2) / (d + 1)
    return (1.0 - total2) / (d + 1)


def branch_operators(s: SchmidtSpectrum, strategy, plan: Optional[DiscriminationPlan] = None) -> np.ndarray:
    """Post-correction receiver maps for every branch, shape ``(2d * d, d, d)``.

    Column ``n`` of map ``b`` is the corrected, unnormalized receiver state of
    branch ``b`` when the input is ``|n>``.
    """
    s.require_li()
    plan = plan or build_unitary(s)
    d = s.d
    t = evolve_amps(plan, np.eye(d, dtype=np.complex128))  # (n, d1, 2d, d3)
    raw = np.transpose(t, (2, 3, 1, 0)).reshape(2 * d * d, d, d)
    return correction_table(d, strategy) @ raw


def _second_moment(ops: np.ndarray) -> float:
    d = ops.shape[-1]
    tr = np.trace(ops, axis1=1, axis2=2)
    hs = np.sum(np.abs(ops) ** 2, axis=(1, 2))
    return math.fsum((np.abs(tr) ** 2 + hs).tolist()) / (d * (d + 1))


def exact_average(s: SchmidtSpectrum, strategy, plan: Optional[DiscriminationPlan] = None) -> float:
    """Haar-average fidelity evaluated exactly, without sampling."""
    return _second_moment(branch_operators(s, strategy, plan))


def conditional_inconclusive_average(s: SchmidtSpectrum, strategy, plan: Optional[DiscriminationPlan] = None) -> Optional[float]:
    """Average fidelity conditioned on an inconclusive outcome; ``None`` if that never happens."""
    d = s.d
    weight = 1.0 - d * s.a_min2
    if weight <= 1e-15:
        return None
    ops = branch_operators(s, strategy, plan)[d * d:]
    return _second_moment(ops) / weight


def _trial_rng(seed, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def _mc_block(plan, corrections, seed, start, stop):
    d = plan.d
    psis = np.array([haar_amps(d, _trial_rng(seed, i)) for i in range(start, stop)])
    t = evolve_amps(plan, psis)  # (T, d1, 2d, d3)
    branches = np.transpose(t, (0, 2, 3, 1)).reshape(len(psis), 2 * d * d, d)
    return kernels.branch_fidelity_sum(psis, branches, corrections)


def mc_samples(
    s: SchmidtSpectrum,
    strategy,
    trials: int,
    seed: int,
    workers: int = 1,
    plan: Optional[DiscriminationPlan] = None,
) -> np.ndarray:
    """Branch-averaged fidelity for each Haar-sampled input, in trial order.

    Trial ``i`` draws its input from its own stream spawned from ``seed``, so
    the samples do not depend on ``workers``.
    """
    s.require_li()
    plan = plan or build_unitary(s)
    corrections = correction_table(s.d, strategy)
    bounds = [(a, min(a + MC_BLOCK, trials)) for a in range(0, trials, MC_BLOCK)]
    if workers <= 1:
        parts = [_mc_block(plan, corrections, seed, a, b) for a, b in bounds]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda ab: _mc_block(plan, corrections, seed, *ab), bounds))
    return np.concatenate(parts) if parts else np.zeros(0)


def mc_average(
    s: SchmidtSpectrum,
    strategy,
    trials: int,
    seed: int,
    workers: int = 1,
    plan: Optional[DiscriminationPlan] = None,
) -> Tuple[float, float]:
    """Monte Carlo mean and standard error of the average fidelity."""
    if trials < 100:
        raise ValueError("mc_average needs at least 100 trials")
    x = mc_samples(s, strategy, trials, seed, workers, plan).tolist()
    mean = math.fsum(x) / trials
    var = math.fsum((v - mean) ** 2 for v in x) / (trials - 1)
    return mean, math.sqrt(var / trials)


def haar_moment_check(d: int, a: int, b: int, trials: int, rng: np.random.Generator) -> Tuple[float, float, float]:
    """Estimate of ``E|<a|psi>|^2 |<b|psi>|^2`` with its standard error and exact value."""
    if not (0 <= a < d and 0 <= b < d):
        raise ValueError("basis labels out of range")
    psi = haar_amps(d, rng, size=trials)
    x = np.abs(psi[:, a]) ** 2 * np.abs(psi[:, b]) ** 2
    expected = (1.0 + (a == b)) / (d * (d + 1))
    return float(x.mean()), float(x.std(ddof=1) / np.sqrt(trials)), expected


@dataclass(frozen=True)
class FidelityReport:
    spectrum: SchmidtSpectrum
    strategy: CorrectionStrategy
    analytic: float
    exact: float
    mc_mean: Optional[float]
    mc_stderr: Optional[float]
    trials: int
    banaszek_corrected: float
    banaszek_as_written: float

    CSV_COLUMNS = ("strategy", "analytic", "exact", "mc_mean", "mc_stderr", "trials", "banaszek_corrected", "banaszek_as_written")

    def to_dict(self) -> dict:
        out = asdict(self)
        out["spectrum"] = list(self.spectrum.coeffs)
        out["strategy"] = self.strategy.value
        out["d"] = self.spectrum.d
        return out

    def csv_header(self) -> list:
        return ["d"] + [f"A_{i}" for i in range(self.spectrum.d)] + list(self.CSV_COLUMNS)

    def csv_row(self) -> list:
        row = {**self.to_dict()}
        return [self.spectrum.d, *self.spectrum.coeffs] + [row[c] for c in self.CSV_COLUMNS]


def fidelity_report(
    s: SchmidtSpectrum,
    strategy,
    trials: int = 0,
    seed: int = 0,
    workers: int = 1,
    plan: Optional[DiscriminationPlan] = None,
) -> FidelityReport:
    strategy = CorrectionStrategy.parse(strategy)
    plan = plan or build_unitary(s)
    mean = err = None
    if trials:
        mean, err = mc_average(s, strategy, trials, seed, workers, plan)
    return FidelityReport(
        spectrum=s,
        strategy=strategy,
        analytic=analytic(s, strategy),
        exact=exact_average(s, strategy, plan),
        mc_mean=mean,
        mc_stderr=err,
        trials=trials,
        banaszek_corrected=banaszek_bound(s.coeffs, BanaszekVariant.CORRECTED),
        banaszek_as_written=banaszek_bound(s.coeffs, BanaszekVariant.AS_WRITTEN),
    )
