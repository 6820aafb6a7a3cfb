"""Command line front-end.

Exit codes: 0 success, 1 usage or configuration error, 2 linearly dependent
spectrum, 3 verification failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .channel import SchmidtSpectrum
from .discrimination import build_unitary, feasibility_search
from .errors import LinearlyDependentError, QuditTeleportError
from .fidelity import BanaszekVariant, banaszek_bound, exact_average, f0, f1, f2, fidelity_report
from .teleport import CorrectionStrategy, enumerate_runs
from .core import basis_state
from .verify import run_verify

log = logging.getLogger("qudit_teleport")

CSV_VERSION_LINE = "# qudit-teleport v1"
EXIT_OK, EXIT_USAGE, EXIT_DOMAIN, EXIT_VERIFY = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass(frozen=True)
class RunConfig:
    d: int
    spectrum: SchmidtSpectrum
    strategy: CorrectionStrategy
    trials: int
    seed: int
    output: Optional[str]
    format: str
    workers: int = 1

    def to_dict(self) -> dict:
        # workers is deliberately absent: output must not depend on it
        return {
            "d": self.d,
            "spectrum": list(self.spectrum.coeffs),
            "strategy": self.strategy.value,
            "trials": self.trials,
            "seed": self.seed,
            "format": self.format,
        }


def parse_spectrum(text: str, d: Optional[int], squares: bool = False, renormalize: bool = False) -> SchmidtSpectrum:
    text = text.strip()
    if text.lower() == "maximal":
        if d is None:
            raise UsageError("the 'maximal' preset needs --d")
        s = SchmidtSpectrum.maximal(d)
        log.info("preset 'maximal' expanded to %s", list(s.coeffs))
        return s
    try:
        values = json.loads(text) if text.startswith("[") else [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise UsageError(f"cannot parse spectrum {text!r}: {exc}") from None
    if d is not None and len(values) != d:
        raise UsageError(f"spectrum has {len(values)} coefficients but --d is {d}")
    if squares:
        return SchmidtSpectrum.from_squares(values, renormalize=renormalize)
    return SchmidtSpectrum.from_amplitudes(values, renormalize=renormalize)


def _seed(value: Optional[int]) -> int:
    if value is not None:
        return value
    env = os.environ.get("QT_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"QT_SEED must be an integer, got {env!r}") from None


def _config(args) -> RunConfig:
    text = args.spectrum
    if args.spectrum_file:
        with open(args.spectrum_file) as fh:
            text = fh.read()
    if text is None:
        raise UsageError("one of --spectrum or --spectrum-file is required")
    s = parse_spectrum(text, args.d, args.amp2, args.renormalize)
    seed = _seed(args.seed)
    if not 0 <= seed < 2 ** 64:
        raise UsageError("seed must be a 64-bit unsigned integer")
    return RunConfig(
        d=s.d,
        spectrum=s,
        strategy=CorrectionStrategy.parse(getattr(args, "strategy", "xz")),
        trials=getattr(args, "trials", 0),
        seed=seed,
        output=args.output,
        format=args.format,
        workers=getattr(args, "workers", 1),
    )


def _write(text: str, path: Optional[str]) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


def _csv(header: List[str], rows: List[list]) -> str:
    buf = io.StringIO()
    buf.write(CSV_VERSION_LINE + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def _json(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def discrimination_summary(s: SchmidtSpectrum, plan=None) -> dict:
    plan = plan or build_unitary(s)
    return {
        "failure": plan.failure,
        "success": plan.success,
        "phi_norms2": [float(np.vdot(p, p).real) for p in plan.phi],
        "unitarity_residual": plan.unitarity_residual,
        "q_min_eigenvalue": plan.q_min_eigenvalue(),
    }


def cmd_simulate(cfg: RunConfig) -> str:
    s = cfg.spectrum
    plan = build_unitary(s)
    report = fidelity_report(s, cfg.strategy, cfg.trials, cfg.seed, cfg.workers, plan)
    if cfg.format == "csv":
        return _csv(report.csv_header(), [report.csv_row()])
    runs = enumerate_runs(s, basis_state(0, s.d), cfg.strategy, plan)
    conc = sum(r.probability for r in runs if r.conclusive)
    checks = {
        "conclusive_mass": conc,
        "conclusive_mass_expected": s.d * s.a_min2,
        "ordered_f0_f1_f2": bool(f0(s) <= f1(s) + 1e-12 and f1(s) <= f2(s) + 1e-12),
        "exact_minus_analytic": report.exact - report.analytic,
        "exact_within_banaszek": bool(report.exact <= report.banaszek_corrected + 1e-9),
    }
    if report.mc_stderr is not None:
        z = abs(report.mc_mean - report.exact) / report.mc_stderr if report.mc_stderr > 0 else 0.0
        checks["mc_z_score"] = z
    fid = report.to_dict()
    del fid["spectrum"], fid["strategy"], fid["d"]
    return _json(
        {
            "config": cfg.to_dict(),
            "discrimination": discrimination_summary(s, plan),
            "fidelities": fid,
            "checks": checks,
        }
    )


def cmd_discriminate(cfg: RunConfig, oracle: bool = False, resolution: float = 0.005) -> str:
    s = cfg.spectrum
    out = {"config": cfg.to_dict(), "discrimination": discrimination_summary(s)}
    if oracle:
        failure, point = feasibility_search(s, resolution)
        out["oracle"] = {"resolution": resolution, "failure": failure, "success_point": point.tolist(),
                         "deviation": failure - out["discrimination"]["failure"]}
    if cfg.format == "csv":
        disc = out["discrimination"]
        header = ["d"] + [f"A_{i}" for i in range(s.d)] + ["failure", "unitarity_residual", "q_min_eigenvalue"]
        row = [s.d, *s.coeffs, disc["failure"], disc["unitarity_residual"], disc["q_min_eigenvalue"]]
        if oracle:
            header.append("oracle_failure")
            row.append(out["oracle"]["failure"])
        return _csv(header, [row])
    return _json(out)


SWEEP_COLUMNS = [
    "f0", "f1", "f2", "exact_none", "exact_x", "exact_xz",
    "banaszek_corrected", "banaszek_as_written", "ordered",
]


def sweep_rows(d: int, grid: List[float], fill: str = "uniform") -> List[list]:
    if fill != "uniform":
        raise UsageError(f"unknown fill rule {fill!r}")
    rows = []
    for a2 in grid:
        if not 0 < a2 <= 1.0 / d + 1e-12:
            raise UsageError(f"grid value {a2!r} outside (0, 1/d]")
        a2 = min(a2, 1.0 / d)
        rest = (1.0 - a2) / (d - 1)
        s = SchmidtSpectrum.from_squares([a2] + [rest] * (d - 1), renormalize=True)
        plan = build_unitary(s)
        ex = [exact_average(s, st, plan) for st in ("none", "x", "xz")]
        bc = banaszek_bound(s.coeffs, BanaszekVariant.CORRECTED)
        ba = banaszek_bound(s.coeffs, BanaszekVariant.AS_WRITTEN)
        ordered = f0(s) <= f1(s) + 1e-12 and f1(s) <= f2(s) + 1e-12 and ex[2] <= bc + 1e-9
        rows.append([d, a2, *s.coeffs, f0(s), f1(s), f2(s), *ex, bc, ba, bool(ordered)])
    return rows


def cmd_sweep(d: int, grid: List[float], fill: str, fmt: str) -> str:
    rows = sweep_rows(d, grid, fill)
    header = ["d", "a_min2"] + [f"A_{i}" for i in range(d)] + SWEEP_COLUMNS
    if fmt == "json":
        return _json([dict(zip(header, r)) for r in rows])
    return _csv(header, rows)


def cmd_verify(depth: str) -> tuple:
    report = run_verify(depth)
    return _json(report.to_dict()), report.passed


def _spectrum_args(p):
    p.add_argument("--d", type=int, help="dimension (required for presets)")
    p.add_argument("--spectrum", help="comma-separated amplitudes, a JSON array, or 'maximal'")
    p.add_argument("--spectrum-file", help="JSON file holding an array of amplitudes")
    p.add_argument("--amp2", action="store_true", help="values are squared amplitudes")
    p.add_argument("--renormalize", action="store_true", help="rescale to unit norm instead of rejecting")
    p.add_argument("--seed", type=int, default=None, help="master seed (falls back to $QT_SEED, then 0)")
    p.add_argument("--output", "-o", default=None, help="output path (default stdout)")
    p.add_argument("--format", choices=("json", "csv"), default="json")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qudit-teleport", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sim = sub.add_parser("simulate", help="fidelity report for one spectrum and strategy")
    _spectrum_args(sim)
    sim.add_argument("--strategy", default="xz", choices=[c.value for c in CorrectionStrategy])
    sim.add_argument("--trials", type=int, default=10000)
    sim.add_argument("--workers", type=int, default=1)

    dis = sub.add_parser("discriminate", help="optimal discrimination plan")
    _spectrum_args(dis)
    dis.add_argument("--oracle", action="store_true", help="also run the grid-search feasibility oracle")
    dis.add_argument("--resolution", type=float, default=0.005)

    sw = sub.add_parser("sweep", help="fidelities over a grid of A_min^2")
    sw.add_argument("--d", type=int, required=True)
    sw.add_argument("--points", type=int, default=10, help="evenly spaced points in (0, 1/d]")
    sw.add_argument("--grid", help="explicit comma-separated A_min^2 values")
    sw.add_argument("--fill", default="uniform", help="rule for the remaining coefficients")
    sw.add_argument("--output", "-o", default=None)
    sw.add_argument("--format", choices=("json", "csv"), default="csv")

    ver = sub.add_parser("verify", help="run the invariant suite")
    ver.add_argument("--depth", choices=("quick", "full"), default="quick")
    ver.add_argument("--output", "-o", default=None)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr)
    try:
        if args.command == "verify":
            text, ok = cmd_verify(args.depth)
            _write(text, args.output)
            return EXIT_OK if ok else EXIT_VERIFY
        if args.command == "sweep":
            if args.d < 2:
                raise UsageError("--d must be at least 2")
            if args.grid:
                grid = [float(v) for v in args.grid.split(",") if v.strip()]
            else:
                if args.points < 1:
                    raise UsageError("--points must be positive")
                grid = [(i + 1) / (args.points * args.d) for i in range(args.points)]
            _write(cmd_sweep(args.d, grid, args.fill, args.format), args.output)
            return EXIT_OK
        cfg = _config(args)
        if args.command == "simulate":
            if cfg.trials and cfg.trials < 100:
                raise UsageError("--trials must be 0 or at least 100")
            if cfg.workers < 1:
                raise UsageError("--workers must be positive")
            _write(cmd_simulate(cfg), cfg.output)
        else:
            _write(cmd_discriminate(cfg, args.oracle, args.resolution), cfg.output)
        return EXIT_OK
    except LinearlyDependentError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (UsageError, QuditTeleportError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
