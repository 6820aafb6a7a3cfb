#!/usr/bin/env python3
"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Both backends are fed identical inputs; the script also checks that their
outputs agree before reporting timings.
"""
import argparse
import timeit

import numpy as np

from qudit_teleport import kernels
from qudit_teleport.channel import random_spectrum, nu_family
from qudit_teleport.core import haar_amps
from qudit_teleport.discrimination import build_unitary
from qudit_teleport.teleport import correction_table, evolve_amps


def mc_inputs(d, trials, rng):
    s = random_spectrum(d, rng)
    plan = build_unitary(s)
    psis = haar_amps(d, rng, size=trials)
    t = evolve_amps(plan, psis)
    branches = np.ascontiguousarray(np.transpose(t, (0, 2, 3, 1)).reshape(trials, 2 * d * d, d))
    return psis, branches, correction_table(d, "xz")


def psd_inputs(d, points, rng):
    s = random_spectrum(d, rng)
    return nu_family(s).gram, rng.uniform(0, 1.0 / d, size=(points, d))


def bench(label, fn, impls, repeat):
    ref = None
    row = [label]
    for name, mod in impls.items():
        out = np.asarray(fn(mod))
        if ref is None:
            ref = out
        elif out.dtype == bool:
            assert np.array_equal(out, ref), f"{name} disagrees on {label}"
        else:
            np.testing.assert_allclose(out, ref, rtol=1e-10)
        best = min(timeit.repeat(lambda: fn(mod), number=1, repeat=repeat))
        row.append(best)
    return row


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    impls = kernels.implementations()
    if "cython" not in impls:
        print("compiled extension not available; timing the numpy fallback only")

    rows = []
    for d, trials in ((2, 20000), (4, 10000), (6, 4000)):
        psi, br, corr = mc_inputs(d, trials, rng)
        rows.append(bench(f"branch_fidelity_sum d={d} T={trials}",
                          lambda m: kernels.branch_fidelity_sum(psi, br, corr, impl=m), impls, args.repeat))
    for d, n in ((2, 200000), (3, 200000), (4, 100000)):
        gram, p = psd_inputs(d, n, rng)
        rows.append(bench(f"psd_mask d={d} N={n}",
                          lambda m: kernels.psd_mask(gram, p, 1e-10, impl=m), impls, args.repeat))

    names = list(impls)
    width = max(len(r[0]) for r in rows)
    print(f"{'kernel':<{width}}  " + "  ".join(f"{n + ' [ms]':>12}" for n in names)
          + ("     speedup" if len(names) > 1 else ""))
    for r in rows:
        line = f"{r[0]:<{width}}  " + "  ".join(f"{t * 1e3:12.2f}" for t in r[1:])
        if len(names) > 1:
            line += f"  {r[1] / r[2]:10.1f}x"
        print(line)


if __name__ == "__main__":
    main()
