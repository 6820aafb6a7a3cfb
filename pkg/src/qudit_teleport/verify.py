"""Self-check suite run by ``qudit-teleport verify``."""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, List

import numpy as np

from .channel import SchmidtSpectrum, decompose_channel, li_rank, nu_family, random_spectrum
from .core import bell_state, clock_z, fourier, gxor, haar_state, shift_x, unitarity_residual
from .discrimination import build_unitary, feasibility_oracle, optimal_failure, q_matrix
from .fidelity import (
    BanaszekVariant,
    banaszek_bound,
    exact_average,
    f0,
    f1,
    f2,
    haar_moment_check,
    mc_average,
)
from .teleport import conditional_state_check, enumerate_runs, enumerate_standard, protocol_identity_deviation

VERIFY_SEED = 20240517


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""
    seconds: float = 0.0


@dataclass
class VerifyReport:
    depth: str
    checks: List[CheckResult] = field(default_factory=list)
    adjudication: List[dict] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        return {
            "depth": self.depth,
            "passed": self.passed,
            "failures": [c.name for c in self.checks if not c.passed],
            "checks": [c.__dict__ for c in self.checks],
            "adjudication": self.adjudication,
        }


def _run(report: VerifyReport, name: str, fn: Callable[[], str]) -> None:
    t0 = time.perf_counter()
    try:
        detail = fn() or ""
        ok = True
    except AssertionError as exc:
        ok, detail = False, str(exc)
    except Exception as exc:  # noqa: BLE001
        ok, detail = False, f"{type(exc).__name__}: {exc}"
    report.checks.append(CheckResult(name, ok, detail, round(time.perf_counter() - t0, 3)))


def _close(value, target, tol, what):
    assert abs(value - target) <= tol, f"{what}: {value!r} vs {target!r} (tol {tol})"


def check_algebra(dims=range(2, 9)) -> str:
    worst = 0.0
    for d in dims:
        x, z, f, g = shift_x(d), clock_z(d), fourier(d), gxor(d)
        eye = np.eye(d)
        worst = max(
            worst,
            np.max(np.abs(np.linalg.matrix_power(x, d) - eye)),
            np.max(np.abs(np.linalg.matrix_power(z, d) - eye)),
            np.max(np.abs(g @ g - np.eye(d * d))),
            unitarity_residual(f),
            np.max(np.abs(z @ x - np.exp(2j * np.pi / d) * x @ z)),
        )
        bells = np.array([bell_state(n, m, d).amps for n in range(d) for m in range(d)])
        worst = max(worst, np.max(np.abs(bells.conj() @ bells.T - np.eye(d * d))))
        for n in range(d):
            for m in range(d):
                mapped = g @ bell_state(n, m, d).amps
                worst = max(worst, np.max(np.abs(mapped - np.kron(f[:, n], np.eye(d)[m]))))
    assert worst <= 1e-10, f"max deviation {worst:.3e}"
    return f"max deviation {worst:.3e}"


def check_standard_protocol(rng) -> str:
    worst = 0.0
    for d in (2, 3, 5):
        for _ in range(5):
            for r in enumerate_standard(d, haar_state(d, rng)):
                worst = max(worst, abs(r.fidelity - 1), abs(r.probability - 1 / d ** 2))
    assert worst <= 1e-10, f"max deviation {worst:.3e}"
    return f"max deviation {worst:.3e}"


def check_channel(rng) -> str:
    for _ in range(20):
        d = int(rng.integers(2, 7))
        s = random_spectrum(d, rng)
        fam = nu_family(s)
        idx = np.arange(d)
        circ = fam.gram[(idx[:, None] + 1) % d, (idx[None, :] + 1) % d]
        assert np.max(np.abs(circ - fam.gram)) <= 1e-12, "Gram matrix not circulant"
        assert li_rank(s) == (d, True)
        dec = decompose_channel(s)
        if not dec.degenerate:
            rec = dec.weight_success / d + (1 - dec.weight_success) * np.array(dec.residual) ** 2
            _close(float(np.max(np.abs(rec - s.squares))), 0.0, 1e-12, "decomposition")
    return "20 spectra"


def check_discrimination(rng, n=20) -> str:
    worst = 0.0
    for _ in range(n):
        d = int(rng.integers(2, 5))
        s = random_spectrum(d, rng)
        plan = build_unitary(s)
        assert plan.unitarity_residual <= 1e-10
        amps = plan.unitary[:d, :d] @ nu_family(s).vectors.T  # conclusive block, column l = U nu_l
        cross = np.abs(amps - np.diag(np.diag(amps))) ** 2
        worst = max(worst, float(cross.max()))
        qmin = plan.q_min_eigenvalue()
        assert -1e-10 <= qmin <= 1e-8, f"min eigenvalue of Q at optimum {qmin!r}"
        if d * s.a_min2 < 1 - 1e-9:
            over = np.linalg.eigvalsh(q_matrix(s, np.full(d, min(plan.success + 0.01, 1.0))))[0]
            assert over < -1e-6, f"Q stays PSD past the optimum ({over!r})"
    assert worst <= 1e-20, f"cross-talk {worst:.3e}"
    return f"max cross-talk {worst:.3e}"


def check_teleport(rng, n=20) -> str:
    worst = 0.0
    for _ in range(n):
        d = int(rng.integers(2, 7))
        s = random_spectrum(d, rng)
        plan = build_unitary(s)
        for _ in range(3):
            psi = haar_state(d, rng)
            runs = enumerate_runs(s, psi, "xz", plan)
            total = sum(r.probability for r in runs)
            conc = sum(r.probability for r in runs if r.conclusive)
            fid = max(abs(r.fidelity - 1) for r in runs if r.conclusive and r.fidelity is not None)
            worst = max(worst, abs(total - 1), abs(conc - d * s.a_min2), fid)
            rep = conditional_state_check(s, psi, plan)
            assert rep["passed"], f"conditional states deviate by {rep['max_deviation']:.3e}"
            assert protocol_identity_deviation(s, psi, plan) <= 1e-9
    assert worst <= 1e-10, f"max deviation {worst:.3e}"
    return f"max deviation {worst:.3e}"


def check_fidelity_closed_forms(rng, per_d=20) -> str:
    worst = 0.0
    for d in range(2, 7):
        for _ in range(per_d):
            s = random_spectrum(d, rng)
            plan = build_unitary(s)
            e0, e1, e2 = (exact_average(s, st, plan) for st in ("none", "x", "xz"))
            worst = max(worst, abs(e0 - f0(s)), abs(e1 - f1(s)))
            if d == 2:
                worst = max(worst, abs(e2 - f1(s)), abs(e2 - f2(s)))
            assert f0(s) <= f1(s) + 1e-12 and f1(s) <= f2(s) + 1e-12, "closed forms out of order"
            assert e0 <= e1 + 1e-9 and e1 <= e2 + 1e-9, "exact averages out of order"
            assert e2 <= banaszek_bound(s.coeffs) + 1e-9, "exact average exceeds the Banaszek bound"
    assert worst <= 1e-9, f"max deviation {worst:.3e}"
    return f"max deviation {worst:.3e}"


def check_mc(rng, n=4, trials=4000) -> str:
    worst = 0.0
    for i in range(n):
        d = int(rng.integers(2, 5))
        s = random_spectrum(d, rng)
        strategy = ("none", "x", "xz")[i % 3]
        mean, err = mc_average(s, strategy, trials, [VERIFY_SEED, i])
        z = abs(mean - exact_average(s, strategy)) / err
        worst = max(worst, z)
    assert worst <= 3.0, f"MC deviates by {worst:.2f} standard errors"
    return f"max z-score {worst:.2f}"


def check_haar(rng, trials=20000) -> str:
    worst = 0.0
    for d in (2, 3, 4):
        for a, b in ((0, 0), (0, 1)):
            est, err, expected = haar_moment_check(d, a, b, trials, rng)
            worst = max(worst, abs(est - expected) / err)
    assert worst <= 3.0, f"moment deviates by {worst:.2f} standard errors"
    return f"max z-score {worst:.2f}"


def check_oracle(rng, n=10, resolution=0.005) -> str:
    worst = 0.0
    for d in (2, 3):
        for _ in range(n):
            s = random_spectrum(d, rng)
            worst = max(worst, abs(feasibility_oracle(s, resolution) - optimal_failure(s)))
    assert worst <= 0.01, f"oracle deviates by {worst:.4f}"
    return f"max oracle deviation {worst:.4f}"


def adjudication_rows(rng, dims=(3, 4), n=10) -> List[dict]:
    """Exact XZ average against the F2 closed form and both Banaszek variants."""
    rows = []
    for d in dims:
        for _ in range(n):
            s = random_spectrum(d, rng)
            exact = exact_average(s, "xz")
            beta = s.residual_amplitudes
            two_channel = np.concatenate([np.full(d, s.a_min), beta])
            rows.append(
                {
                    "d": d,
                    "spectrum": list(s.coeffs),
                    "f1": f1(s),
                    "exact_xz": exact,
                    "f2_closed_form": f2(s),
                    "f2_deviation": exact - f2(s),
                    "banaszek_corrected": banaszek_bound(s.coeffs, BanaszekVariant.CORRECTED),
                    "banaszek_as_written": banaszek_bound(s.coeffs, BanaszekVariant.AS_WRITTEN),
                    "banaszek_two_channel_corrected": banaszek_bound(two_channel, BanaszekVariant.CORRECTED),
                    "within_bounds": bool(f1(s) - 1e-9 <= exact <= banaszek_bound(s.coeffs) + 1e-9),
                }
            )
    return rows


def run_verify(depth: str = "quick") -> VerifyReport:
    if depth not in ("quick", "full"):
        raise ValueError("depth must be 'quick' or 'full'")
    rng = np.random.default_rng(VERIFY_SEED)
    full = depth == "full"
    report = VerifyReport(depth)
    _run(report, "algebraic identities", check_algebra)
    _run(report, "standard teleportation", lambda: check_standard_protocol(rng))
    _run(report, "channel invariants", lambda: check_channel(rng))
    _run(report, "discrimination plan", lambda: check_discrimination(rng, 20 if full else 6))
    _run(report, "conclusive teleportation", lambda: check_teleport(rng, 20 if full else 5))
    _run(report, "closed-form fidelities", lambda: check_fidelity_closed_forms(rng, 20 if full else 4))
    _run(report, "haar second moment", lambda: check_haar(rng, 100000 if full else 20000))
    _run(report, "monte carlo vs exact", lambda: check_mc(rng, 20 if full else 3, 10000 if full else 3000))
    if full:
        _run(report, "feasibility oracle", lambda: check_oracle(rng))

        def adjudicate():
            report.adjudication = adjudication_rows(rng)
            bad = [r for r in report.adjudication if not r["within_bounds"]]
            assert not bad, f"{len(bad)} spectra violate f1 <= exact <= bound"
            dev = max(abs(r["f2_deviation"]) for r in report.adjudication)
            return f"max |exact - F2 closed form| = {dev:.3e}"

        _run(report, "F2 adjudication", adjudicate)
    return report
