"""Compiled vs pure-Python kernels on identical inputs.

    python benchmarks/bench_kernels.py [--sizes 256 1024] [--repeat 3]

Each row times one workload under both backends and checks that the
results agree.  Needs the compiled extension (``pip install -e .``).
"""

from __future__ import annotations

import argparse
import statistics
import sys
import time

import numpy as np

from linerecourse import kernels
from linerecourse.harness.generators import gen_uniform
from linerecourse.tnet_search import TNetEngine


# the pure label-correcting search is roughly cubic; skip it on big inputs
SPFA_MAX_N = 256


def _best(fn, repeat):
    times, out = [], None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), statistics.median(times), out


def engine_run(inst, compiled):
    def go():
        eng = TNetEngine(inst, 3, compiled=compiled)
        phis = []
        for r in range(inst.n):
            ps = eng.search(r, want_si=True)
            phis.append((ps.phi, ps.path.vertices, ps.si))
            eng.augment(ps.path)
        return phis
    return go


def band(inst, force_python):
    S = sorted(inst.scaled[0])
    R = sorted(inst.scaled[1])

    def go():
        return kernels.band_dp(S, R, force_python=force_python)
    return go


def spfa(inst, force_python):
    # reference searches against the t-net matching of the first half of the arrivals
    eng = TNetEngine(inst, 3, compiled=True)
    half = inst.n // 2
    for r in range(half):
        eng.augment(eng.search(r, want_si=False).path)
    spos, rpos = (np.asarray(x, dtype=np.int64) for x in inst.scaled)
    s_match = np.asarray(eng.s_match, dtype=np.int64)
    r_match = np.asarray(eng.r_match, dtype=np.int64)
    alive = np.ones(inst.m, dtype=np.uint8)
    srcs = range(half, min(inst.n, half + 20))

    def go():
        return [kernels.spfa_search(spos, rpos, s_match, r_match, alive, src, 3, 1,
                                    force_python=force_python)[:2]
                for src in srcs]
    return go


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--sizes", type=int, nargs="+", default=[128, 256, 1024])
    p.add_argument("--repeat", type=int, default=3)
    p.add_argument("--seed", type=int, default=1)
    a = p.parse_args(argv)
    if not kernels.HAVE_COMPILED:
        print("compiled kernels not available; build with `pip install -e .`", file=sys.stderr)
        return 2
    print(f"{'workload':<22}{'n':>6}{'compiled s':>12}{'python s':>12}{'speedup':>9}  agree", flush=True)
    ok = True
    for n in a.sizes:
        inst = gen_uniform(n, 2 * n, 10**6, [a.seed, n])
        cases = [
            ("tnet engine run", engine_run(inst, True), engine_run(inst, False)),
            ("band dp (opt)", band(inst, False), band(inst, True)),
        ]
        if n <= SPFA_MAX_N:
            cases.append(("spfa reference x20", spfa(inst, False), spfa(inst, True)))
        for name, fc, fp in cases:
            tc, _, oc = _best(fc, a.repeat)
            tp, _, op = _best(fp, 1 if n > 1024 else a.repeat)
            agree = _norm(oc) == _norm(op)
            ok &= agree
            print(f"{name:<22}{n:>6}{tc:>12.4f}{tp:>12.4f}{tp / tc:>8.1f}x  {agree}", flush=True)
    return 0 if ok else 1


def _norm(x):
    if isinstance(x, (list, tuple)):
        return [_norm(v) for v in x]
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, np.integer):
        return int(x)
    return x


if __name__ == "__main__":
    sys.exit(main())
