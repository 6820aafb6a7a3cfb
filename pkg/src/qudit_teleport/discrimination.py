"""Optimal unambiguous discrimination of the nu-family.

The discriminating unitary acts on a ``2d``-dimensional space: coordinates
``0..d-1`` are the conclusive slots ``|u_l>``, coordinates ``d..2d-1`` the
inconclusive slots ``|a_k>``. Particle-2 states are embedded into the first
``d`` coordinates.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from . import kernels
from .channel import SchmidtSpectrum, nu_family
from .core import unitarity_residual
from .errors import InternalConsistencyError, OracleUnsupported, UnsupportedPriors

PSD_TOL = 1e-10
ISOMETRY_TOL = 1e-10
MAX_ORACLE_DIM = 4


def optimal_failure(s: SchmidtSpectrum) -> float:
    """Smallest achievable average failure probability, ``1 - d * A_min^2``."""
    s.require_li()
    return float(min(1.0, max(0.0, 1.0 - s.d * s.a_min2)))


def q_matrix(s: SchmidtSpectrum, p: Sequence[float]) -> np.ndarray:
    """``Q[k, l] = <nu_k|nu_l> - p_k delta_kl`` for success probabilities ``p``."""
    p = np.asarray(p, dtype=float)
    if p.shape != (s.d,):
        raise ValueError(f"expected {s.d} success probabilities, got shape {p.shape}")
    if np.any(p < 0) or np.any(p > 1):
        raise ValueError("success probabilities must lie in [0, 1]")
    return nu_family(s).gram - np.diag(p)


def phi_states(s: SchmidtSpectrum) -> np.ndarray:
    """Inconclusive components ``|phi_l>`` (row ``l``) in the ``|a_k>`` basis.

    ``phi_l[k] = d^{-1/2} sum_m exp(2 pi i m (l - k)/d) sqrt(A_m^2 - A_min^2)``.
    """
    s.require_li()
    d = s.d
    beta = s.residual_amplitudes
    m = np.arange(d)
    lk = (m[:, None] - m[None, :]) % d  # l - k
    phase = np.exp(2j * np.pi * ((lk[:, :, None] * m[None, None, :]) % d) / d)
    return (phase @ beta) / np.sqrt(d)


def complete_orthonormal(columns: np.ndarray, order: Optional[Sequence[int]] = None) -> np.ndarray:
    """Extend orthonormal ``columns`` to a square unitary.

    Standard basis vectors are tried in ``order`` (default index order) and
    orthogonalized with two passes of modified Gram-Schmidt.
    """
    n, r = columns.shape
    order = range(n) if order is None else order
    basis = [columns[:, j] for j in range(r)]
    for i in order:
        if len(basis) == n:
            break
        v = np.zeros(n, dtype=np.complex128)
        v[i] = 1.0
        for _ in range(2):
            for b in basis:
                v = v - np.vdot(b, v) * b
        nv = np.linalg.norm(v)
        if nv > 1e-8:
            basis.append(v / nv)
    if len(basis) != n:
        raise InternalConsistencyError("orthonormal completion did not span the space")
    return np.column_stack(basis)


@dataclass(frozen=True)
class DiscriminationPlan:
    spectrum: SchmidtSpectrum
    failure: float
    phi: np.ndarray  # (d, d), row l is |phi_l> in the inconclusive block
    unitary: np.ndarray  # (2d, 2d)

    @property
    def d(self) -> int:
        return self.spectrum.d

    @property
    def success(self) -> float:
        return 1.0 - self.failure

    @property
    def embed(self) -> np.ndarray:
        """Isometry from particle-2 space into the first ``d`` coordinates."""
        return np.eye(2 * self.d, self.d, dtype=np.complex128)

    def targets(self) -> np.ndarray:
        """Columns ``sqrt(S)|u_l> + |phi_l>``."""
        d = self.d
        t = np.zeros((2 * d, d), dtype=np.complex128)
        t[:d, :] = np.sqrt(self.success) * np.eye(d)
        t[d:, :] = self.phi.T
        return t

    @property
    def unitarity_residual(self) -> float:
        return unitarity_residual(self.unitary)

    def q_min_eigenvalue(self) -> float:
        q = q_matrix(self.spectrum, np.full(self.d, self.success))
        return float(np.linalg.eigvalsh(q)[0])


def build_unitary(
    s: SchmidtSpectrum,
    completion_order: Optional[Sequence[int]] = None,
    priors: Optional[Sequence[float]] = None,
) -> DiscriminationPlan:
    """Construct the optimal discrimination plan and its ``2d x 2d`` unitary."""
    s.require_li()
    d = s.d
    if priors is not None and np.max(np.abs(np.asarray(priors, dtype=float) - 1.0 / d)) > 1e-12:
        raise UnsupportedPriors("only uniform priors 1/d are supported")
    failure = optimal_failure(s)
    phi = phi_states(s)
    fam = nu_family(s)
    plan = DiscriminationPlan(s, failure, phi, np.eye(2 * d, dtype=np.complex128))
    t = plan.targets()
    if np.max(np.abs(t.conj().T @ t - fam.gram)) > ISOMETRY_TOL:
        raise InternalConsistencyError("target vectors do not reproduce the nu-family Gram matrix")
    # nu_l columns factor as diag(A) * sqrt(d) F, so their inverse is F^dag diag(1/A) / sqrt(d)
    k = np.arange(d)
    f_dag = np.exp(-2j * np.pi * (np.outer(k, k) % d) / d) / np.sqrt(d)
    w = t @ (f_dag / s.array[None, :]) / np.sqrt(d)
    u = complete_orthonormal(w, completion_order)
    if unitarity_residual(u) > ISOMETRY_TOL:
        raise InternalConsistencyError("discrimination unitary is not unitary")
    mapped = u[:, :d] @ fam.vectors.T
    if np.max(np.abs(mapped - t)) > ISOMETRY_TOL:
        raise InternalConsistencyError("unitary does not map nu_l onto its target")
    return DiscriminationPlan(s, failure, phi, u)


def feasibility_search(s: SchmidtSpectrum, resolution: float, chunk: int = 1 << 16) -> Tuple[float, np.ndarray]:
    """Grid search for the best average success with ``Q(p)`` positive semidefinite.

    Returns the best average failure and the maximizing grid point. Ties are
    broken towards the lexicographically smallest grid index.
    """
    s.require_li()
    d = s.d
    if d > MAX_ORACLE_DIM:
        raise OracleUnsupported(f"feasibility oracle supports d <= {MAX_ORACLE_DIM}, got {d}")
    if not 0 < resolution <= 1:
        raise ValueError("resolution must lie in (0, 1]")
    n = int(np.floor(1.0 / resolution + 1e-9))
    grid = np.minimum(np.arange(n + 1) * resolution, 1.0)
    gram = nu_family(s).gram
    n_prefix = (n + 1) ** (d - 1)
    best_total, best_point = -1, None
    for start in range(0, n_prefix, chunk):
        flat = np.arange(start, min(start + chunk, n_prefix))
        prefix = np.stack(np.unravel_index(flat, (n + 1,) * (d - 1)), axis=1)

        def feasible(last):
            p = np.concatenate([grid[prefix], grid[last][:, None]], axis=1)
            return kernels.psd_mask(gram, p, PSD_TOL)

        lo = np.zeros(len(flat), dtype=np.int64)
        ok = feasible(lo)
        hi = np.full(len(flat), n + 1, dtype=np.int64)
        while np.any(ok & (hi - lo > 1)):
            mid = (lo + hi) // 2
            live = ok & (hi - lo > 1)
            good = feasible(np.where(live, mid, lo))
            lo = np.where(live & good, mid, lo)
            hi = np.where(live & ~good, mid, hi)
        total = np.where(ok, prefix.sum(axis=1) + lo, -1)
        j = int(np.argmax(total))
        if total[j] > best_total:
            best_total = int(total[j])
            best_point = np.append(grid[prefix[j]], grid[lo[j]])
    if best_point is None:
        raise InternalConsistencyError("no feasible grid point; p = 0 is always feasible")
    return float(1.0 - best_point.sum() / d), best_point


def feasibility_oracle(s: SchmidtSpectrum, resolution: float) -> float:
    """Independent estimate of the optimal failure by brute-force grid search."""
    return feasibility_search(s, resolution)[0]
