"""Probabilistic qudit teleportation through a non-maximally entangled channel."""
from .channel import SchmidtSpectrum, decompose_channel, nu_family, random_spectrum
from .core import StateVector, basis_state, bell_state, clock_z, fourier, gxor, haar_state, shift_x
from .discrimination import DiscriminationPlan, build_unitary, feasibility_oracle, optimal_failure
from .errors import LinearlyDependentError, QuditTeleportError
from .fidelity import (
    BanaszekVariant,
    banaszek_bound,
    exact_average,
    f0,
    f1,
    f2,
    fidelity_report,
    mc_average,
)
from .kernels import BACKEND
from .teleport import CorrectionStrategy, enumerate_runs, run_conclusive, run_standard

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BanaszekVariant",
    "CorrectionStrategy",
    "DiscriminationPlan",
    "LinearlyDependentError",
    "QuditTeleportError",
    "SchmidtSpectrum",
    "StateVector",
    "banaszek_bound",
    "basis_state",
    "bell_state",
    "build_unitary",
    "clock_z",
    "decompose_channel",
    "enumerate_runs",
    "exact_average",
    "f0",
    "f1",
    "f2",
    "feasibility_oracle",
    "fidelity_report",
    "fourier",
    "gxor",
    "haar_state",
    "mc_average",
    "nu_family",
    "optimal_failure",
    "random_spectrum",
    "run_conclusive",
    "run_standard",
    "shift_x",
]
