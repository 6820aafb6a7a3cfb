"""Non-maximally entangled two-qudit channels in Schmidt form."""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, List, Tuple

import numpy as np

from .core import StateVector, _check_dim, z_power
from .errors import InternalConsistencyError, InvalidSpectrum, LinearlyDependentError

ZERO_THRESHOLD = 1e-12
NORM_TOL = 1e-9
GRAM_EIG_THRESHOLD = 1e-10


@dataclass(frozen=True)
class SchmidtSpectrum:
    """Schmidt coefficients ``A_m`` of ``sum_m A_m |m>|m>``, in label order."""

    coeffs: tuple

    def __post_init__(self):
        c = tuple(float(x) for x in self.coeffs)
        _check_dim(len(c))
        if any(not np.isfinite(x) for x in c):
            raise InvalidSpectrum("coefficients must be finite")
        if any(x < 0 for x in c):
            raise InvalidSpectrum(f"coefficients must be nonnegative, got {list(c)}")
        total = sum(x * x for x in c)
        if abs(total - 1.0) > NORM_TOL:
            raise InvalidSpectrum(f"sum of squared coefficients is {total!r}, expected 1")
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def from_amplitudes(cls, values: Iterable[float], renormalize: bool = False) -> "SchmidtSpectrum":
        a = np.asarray(list(values), dtype=float)
        if np.any(a < 0):
            raise InvalidSpectrum(f"coefficients must be nonnegative, got {a.tolist()}")
        if renormalize:
            n = np.linalg.norm(a)
            if n == 0:
                raise InvalidSpectrum("all coefficients are zero")
            a = a / n
        return cls(tuple(a))

    @classmethod
    def from_squares(cls, values: Iterable[float], renormalize: bool = False) -> "SchmidtSpectrum":
        sq = np.asarray(list(values), dtype=float)
        if np.any(sq < 0):
            raise InvalidSpectrum(f"squared coefficients must be nonnegative, got {sq.tolist()}")
        return cls.from_amplitudes(np.sqrt(sq), renormalize=renormalize)

    @classmethod
    def maximal(cls, d: int) -> "SchmidtSpectrum":
        d = _check_dim(d)
        return cls((1.0 / np.sqrt(d),) * d)

    @classmethod
    def from_json(cls, text: str, renormalize: bool = False) -> "SchmidtSpectrum":
        values = json.loads(text)
        if not isinstance(values, list) or not all(isinstance(x, (int, float)) for x in values):
            raise InvalidSpectrum("spectrum JSON must be an array of numbers")
        return cls.from_amplitudes(values, renormalize=renormalize)

    def to_json(self) -> str:
        return json.dumps(list(self.coeffs))

    @property
    def d(self) -> int:
        return len(self.coeffs)

    @property
    def array(self) -> np.ndarray:
        return np.array(self.coeffs)

    @property
    def squares(self) -> np.ndarray:
        return self.array ** 2

    @property
    def a_min(self) -> float:
        return min(self.coeffs)

    @property
    def a_min2(self) -> float:
        return self.a_min ** 2

    @property
    def argmin(self) -> int:
        return int(np.argmin(self.coeffs))

    @property
    def zero_indices(self) -> List[int]:
        return [i for i, a in enumerate(self.coeffs) if a <= ZERO_THRESHOLD]

    @property
    def is_li(self) -> bool:
        return not self.zero_indices

    def require_li(self) -> None:
        if not self.is_li:
            raise LinearlyDependentError(self.zero_indices)

    @property
    def residual_amplitudes(self) -> np.ndarray:
        """``sqrt(A_n^2 - A_min^2)``, clipped at zero."""
        return np.sqrt(np.clip(self.squares - self.a_min2, 0.0, None))


def random_spectrum(d: int, rng: np.random.Generator, floor: float = 0.05) -> SchmidtSpectrum:
    """Random LI spectrum whose smallest amplitude ratio stays above ``floor``."""
    a = rng.random(d) + floor
    return SchmidtSpectrum.from_amplitudes(a, renormalize=True)


def channel_state(s: SchmidtSpectrum) -> StateVector:
    d = s.d
    amps = np.zeros((d, d), dtype=np.complex128)
    amps[np.arange(d), np.arange(d)] = s.array
    return StateVector(amps.ravel(), (d, d))


@dataclass(frozen=True)
class NuFamily:
    d: int
    vectors: np.ndarray  # row l holds |nu_l>
    gram: np.ndarray

    @property
    def states(self) -> List[StateVector]:
        return [StateVector(v, (self.d,)) for v in self.vectors]


def gram_closed_form(s: SchmidtSpectrum) -> np.ndarray:
    """``<nu_n|nu_m> = sum_k A_k^2 exp(2 pi i k (m - n)/d)``."""
    d = s.d
    k = np.arange(d)
    diff = (k[None, :] - k[:, None]) % d  # m - n
    phases = np.exp(2j * np.pi * ((diff[:, :, None] * k[None, None, :]) % d) / d)
    return phases @ s.squares


def nu_family(s: SchmidtSpectrum) -> NuFamily:
    d = s.d
    base = s.array.astype(np.complex128)
    vectors = np.array([z_power(d, l) @ base for l in range(d)])
    gram = gram_closed_form(s)
    direct = vectors.conj() @ vectors.T
    if np.max(np.abs(gram - direct)) > 1e-12:
        raise InternalConsistencyError("closed-form Gram matrix disagrees with direct inner products")
    vectors.setflags(write=False)
    gram.setflags(write=False)
    return NuFamily(d, vectors, gram)


def li_rank(s: SchmidtSpectrum) -> Tuple[int, bool]:
    """Rank of the nu-family and whether it is linearly independent."""
    rank = s.d - len(s.zero_indices)
    eig = np.linalg.eigvalsh(gram_closed_form(s))
    numeric = int(np.sum(eig > GRAM_EIG_THRESHOLD))
    if numeric != rank:
        raise InternalConsistencyError(f"coefficient rank {rank} != Gram rank {numeric}")
    return rank, rank == s.d


@dataclass(frozen=True)
class ChannelDecomposition:
    weight_success: float
    residual: tuple  # empty when the channel is maximal

    @property
    def degenerate(self) -> bool:
        return not self.residual


def decompose_channel(s: SchmidtSpectrum) -> ChannelDecomposition:
    """Split the channel into a maximally entangled part and a residual channel."""
    s.require_li()
    w = s.d * s.a_min2
    rest = 1.0 - w
    if rest <= ZERO_THRESHOLD:
        return ChannelDecomposition(1.0, ())
    res = np.sqrt(np.clip(s.squares - s.a_min2, 0.0, None) / rest)
    res[s.array == s.a_min] = 0.0
    return ChannelDecomposition(w, tuple(float(x) for x in res))
