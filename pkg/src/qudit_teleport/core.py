"""Dense state vectors and operators for small qudit registers.

Operators are plain ``numpy`` complex matrices. Composite registers are indexed
row-major over ``dims``, so subsystem 0 is the most significant digit.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import InvalidDimension, InvalidIndex, InvalidState, ShapeError

DenseOperator = np.ndarray

# branches whose probability falls below this are reported as null
NULL_PROBABILITY = 1e-24


def _check_dim(d: int) -> int:
    if int(d) != d or d < 2:
        raise InvalidDimension(f"dimension must be an integer >= 2, got {d!r}")
    return int(d)


def omega(d: int) -> complex:
    return np.exp(2j * np.pi / d)


@dataclass(frozen=True)
class StateVector:
    """Immutable ket over a register of qudits with dimensions ``dims``."""

    amps: np.ndarray
    dims: tuple = field(default=())

    def __post_init__(self):
        amps = np.array(self.amps, dtype=np.complex128).reshape(-1)
        dims = tuple(int(x) for x in (self.dims or (amps.size,)))
        for d in dims:
            _check_dim(d)
        if math.prod(dims) != amps.size:
            raise ShapeError(f"{amps.size} amplitudes do not match dims {dims}")
        amps.setflags(write=False)
        object.__setattr__(self, "amps", amps)
        object.__setattr__(self, "dims", dims)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def normalized(self) -> "StateVector":
        n = self.norm
        if n == 0.0:
            raise InvalidState("cannot normalize the zero vector")
        return StateVector(self.amps / n, self.dims)

    def tensor(self, other: "StateVector") -> "StateVector":
        return StateVector(np.kron(self.amps, other.amps), self.dims + other.dims)

    def inner(self, other: "StateVector") -> complex:
        """Return ``<self|other>``."""
        return complex(np.vdot(self.amps, other.amps))

    def as_tensor(self) -> np.ndarray:
        return self.amps.reshape(self.dims)


@dataclass(frozen=True)
class MeasurementRecord:
    outcome: int
    probability: float
    post_state: Optional[StateVector]


def basis_state(index: int, d: int) -> StateVector:
    d = _check_dim(d)
    if not 0 <= index < d:
        raise InvalidIndex(f"basis index {index} out of range for d={d}")
    amps = np.zeros(d, dtype=np.complex128)
    amps[index] = 1.0
    return StateVector(amps, (d,))


def shift_x(d: int) -> DenseOperator:
    """Cyclic shift ``X|n> = |n+1 mod d>``."""
    return x_power(d, 1)


def x_power(d: int, k: int) -> DenseOperator:
    d = _check_dim(d)
    out = np.zeros((d, d), dtype=np.complex128)
    n = np.arange(d)
    out[(n + k) % d, n] = 1.0
    return out


def clock_z(d: int) -> DenseOperator:
    """Clock operator ``Z|n> = exp(2 pi i n/d)|n>``."""
    return z_power(d, 1)


def z_power(d: int, k: int) -> DenseOperator:
    d = _check_dim(d)
    n = np.arange(d)
    return np.diag(np.exp(2j * np.pi * ((n * k) % d) / d))


def fourier(d: int) -> DenseOperator:
    """Discrete Fourier transform with ``<k|F|l> = exp(2 pi i lk/d)/sqrt(d)``."""
    d = _check_dim(d)
    k = np.arange(d)
    return np.exp(2j * np.pi * (np.outer(k, k) % d) / d) / np.sqrt(d)


def gxor(d: int) -> DenseOperator:
    """Generalized CNOT on two qudits: ``|i, j> -> |i, (i - j) mod d>``."""
    d = _check_dim(d)
    out = np.zeros((d * d, d * d), dtype=np.complex128)
    i, j = np.meshgrid(np.arange(d), np.arange(d), indexing="ij")
    out[(i * d + (i - j) % d).ravel(), (i * d + j).ravel()] = 1.0
    return out


def bell_state(n: int, m: int, d: int, shift_sign: int = -1) -> StateVector:
    """Generalized Bell state ``sum_j exp(2 pi i jn/d)|j>|j - m> / sqrt(d)``.

    With the default ``shift_sign=-1``, ``GXOR |Psi_{n,m}> = F|n> (x) |m>`` and
    ``|Psi_00>|psi> = d^-1 sum_{l,k} Z^{-l} X^k|psi> (x) |Psi_{l,k}>`` hold for
    every ``d``. ``shift_sign=+1`` gives the ``|j + m>`` labelling, which maps
    to ``F|n> (x) |-m>`` instead; the two agree for ``d = 2``.
    """
    d = _check_dim(d)
    if not (0 <= n < d and 0 <= m < d):
        raise InvalidIndex(f"Bell indices ({n}, {m}) out of range for d={d}")
    if shift_sign not in (1, -1):
        raise ValueError("shift_sign must be +1 or -1")
    amps = np.zeros((d, d), dtype=np.complex128)
    j = np.arange(d)
    amps[j, (j + shift_sign * m) % d] = np.exp(2j * np.pi * ((j * n) % d) / d) / np.sqrt(d)
    return StateVector(amps.ravel(), (d, d))


def apply_array(op: np.ndarray, amps: np.ndarray, dims: Sequence[int], targets: Sequence[int]) -> np.ndarray:
    """Apply ``op`` to ``targets`` of flat amplitude arrays.

    ``amps`` may carry leading batch axes; the last axis is the register.
    """
    dims = tuple(dims)
    targets = tuple(targets)
    if len(set(targets)) != len(targets) or any(not 0 <= t < len(dims) for t in targets):
        raise ShapeError(f"invalid targets {targets} for {len(dims)} subsystems")
    tdim = math.prod(dims[t] for t in targets)
    if op.shape != (tdim, tdim):
        raise ShapeError(f"operator shape {op.shape} does not match target dimension {tdim}")
    batch = amps.shape[:-1]
    nb = len(batch)
    nt = len(targets)
    t = amps.reshape(batch + dims)
    src = [nb + i for i in targets]
    dst = list(range(t.ndim - nt, t.ndim))
    t = np.moveaxis(t, src, dst)
    moved = t.shape
    t = t.reshape(moved[: t.ndim - nt] + (tdim,)) @ op.T
    t = np.moveaxis(t.reshape(moved), dst, src)
    return np.ascontiguousarray(t).reshape(batch + (math.prod(dims),))


def apply(op: DenseOperator, state: StateVector, targets: Sequence[int]) -> StateVector:
    """Apply ``op`` to the listed subsystems of ``state`` (identity elsewhere)."""
    op = np.asarray(op, dtype=np.complex128)
    return StateVector(apply_array(op, state.amps, state.dims, targets), state.dims)


def embed_subsystem(state: StateVector, target: int, new_dim: int) -> StateVector:
    """Inject subsystem ``target`` into the first coordinates of a larger space."""
    old = state.dims[target]
    if new_dim < old:
        raise ShapeError(f"cannot embed dimension {old} into {new_dim}")
    t = state.as_tensor()
    pad = [(0, 0)] * len(state.dims)
    pad[target] = (0, new_dim - old)
    dims = list(state.dims)
    dims[target] = new_dim
    return StateVector(np.pad(t, pad).ravel(), tuple(dims))


def _branch_tensors(state: StateVector, target: int, basis: Optional[DenseOperator]):
    if not 0 <= target < len(state.dims):
        raise ShapeError(f"target {target} out of range")
    d = state.dims[target]
    if basis is not None:
        basis = np.asarray(basis, dtype=np.complex128)
        if basis.shape != (d, d):
            raise ShapeError(f"basis shape {basis.shape} does not match subsystem dimension {d}")
    norm2 = float(np.vdot(state.amps, state.amps).real)
    if norm2 == 0.0:
        raise InvalidState("cannot measure the zero vector")
    amps = state.amps / np.sqrt(norm2)
    if basis is not None:
        amps = apply_array(basis.conj().T, amps, state.dims, [target])
    t = np.moveaxis(amps.reshape(state.dims), target, 0)
    probs = (t.real ** 2 + t.imag ** 2).reshape(t.shape[0], -1).sum(axis=1)
    return t, probs, basis


def _post_state(state: StateVector, target: int, t: np.ndarray, outcome: int, prob: float, basis) -> Optional[StateVector]:
    if prob < NULL_PROBABILITY:
        return None
    proj = np.zeros_like(t)
    proj[outcome] = t[outcome] / np.sqrt(prob)
    amps = np.moveaxis(proj, 0, target).ravel()
    if basis is not None:
        amps = apply_array(basis, amps, state.dims, [target])
    return StateVector(amps, state.dims)


def enumerate_branches(state: StateVector, target: int, basis: Optional[DenseOperator] = None) -> list:
    """All measurement outcomes of ``target`` with probabilities and post-measurement states.

    ``basis`` columns are the measurement kets; ``None`` means computational.
    Null outcomes carry ``post_state=None``.
    """
    t, probs, basis = _branch_tensors(state, target, basis)
    return [
        MeasurementRecord(j, float(probs[j]), _post_state(state, target, t, j, float(probs[j]), basis))
        for j in range(len(probs))
    ]


def sample_index(probs: np.ndarray, rng: np.random.Generator) -> int:
    """Inverse-CDF draw over ``probs`` in index order."""
    cdf = np.cumsum(probs)
    u = rng.random() * cdf[-1]
    return int(min(np.searchsorted(cdf, u, side="right"), len(probs) - 1))


def measure(state: StateVector, target: int, rng: np.random.Generator, basis: Optional[DenseOperator] = None) -> MeasurementRecord:
    t, probs, basis = _branch_tensors(state, target, basis)
    j = sample_index(probs, rng)
    return MeasurementRecord(j, float(probs[j]), _post_state(state, target, t, j, float(probs[j]), basis))


def haar_amps(d: int, rng: np.random.Generator, size: Optional[int] = None) -> np.ndarray:
    """Normalized standard complex Gaussian vectors, shape ``(d,)`` or ``(size, d)``."""
    shape = (d,) if size is None else (size, d)
    z = rng.standard_normal(shape + (2,)).view(np.complex128)[..., 0]
    return z / np.linalg.norm(z, axis=-1, keepdims=True)


def haar_state(d: int, rng: np.random.Generator) -> StateVector:
    d = _check_dim(d)
    return StateVector(haar_amps(d, rng), (d,))


def unitarity_residual(u: np.ndarray) -> float:
    return float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))


def phase_distance(a: np.ndarray, b: np.ndarray) -> float:
    """``min_theta ||a - exp(i theta) b||`` for vectors of equal length."""
    ov = np.vdot(b, a)
    phase = ov / abs(ov) if abs(ov) > 0 else 1.0
    return float(np.linalg.norm(a - phase * b))
