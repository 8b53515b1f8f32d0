"""Acceptance suite: one test per criterion, one PASS/FAIL line each.

Run with ``pytest tests/test_acceptance.py`` (the summary lines appear at the
end of the session) or ``python tests/test_acceptance.py``.  Expensive runs
are shared between criteria through module-scoped fixtures.
"""

from __future__ import annotations

import io
import json
import math
import statistics
import sys
import time
from fractions import Fraction

import pytest

from linerecourse.alternating import k_condition, min_k
from linerecourse.harness.generators import generate, make_rng
from linerecourse.harness.metrics import block_report_for, run_algorithm
from linerecourse.harness.traces import (
    check_invariants_trace,
    check_lemma6_trace,
    check_lemma7_trace,
    read_trace,
    write_trace,
)
from linerecourse.line_model import Instance
from linerecourse.opt_oracle import opt_brute, opt_dp

F = Fraction
T = F(3)

pytestmark = pytest.mark.slow

# criterion -> (passed, detail); printed by the terminal summary hook in conftest
RESULTS: dict[int, tuple[bool, str]] = {}

TITLES = {
    1: "oracle equivalence (dp vs brute force)",
    2: "offline prefix bound c(M_off) <= t OPT_i",
    3: "reference and potentials engines agree",
    4: "structural invariants (phi, psi, laminarity, free servers)",
    5: "recourse output soundness",
    6: "freeze persistence j >= i^2",
    7: "scaling of ratio and recourse",
    8: "alternating near-optimality",
    9: "path-structure and forest-depth checkers",
    10: "top-block OPT bound",
    11: "alternating online ratio over log delta",
    12: "min_k correctness",
}


def report(num: int, ok: bool, detail: str) -> None:
    RESULTS[num] = (ok, detail)
    assert ok, f"criterion {num}: {detail}"


def summary_lines() -> list[str]:
    out = []
    for num in sorted(TITLES):
        if num not in RESULTS:
            out.append(f"criterion {num:>2} NOT RUN  {TITLES[num]}")
            continue
        ok, detail = RESULTS[num]
        out.append(f"criterion {num:>2} {'PASS' if ok else 'FAIL'}  {TITLES[num]}: {detail}")
    return out


def _roundtrip(algo, inst, out, **kw):
    buf = io.StringIO()
    m = out.metrics
    write_trace(buf, algo, inst, out.state, cost=m.cost, opt=m.opt, **kw)
    buf.seek(0)
    return read_trace(buf)


# invariant messages from the trace replay, grouped by criterion
_KINDS = {
    2: ("exceeds t * OPT_i",),
    4: ("bad path", "recorded phi", "negative phi", "psi + phi", "free servers", "not laminar"),
    5: ("not a matching", "active or frozen", "c(M_f)", "inactive cost"),
    6: ("unfrozen at",),
}


def _classify(errs):
    out = {k: [] for k in _KINDS}
    for e in errs:
        for k, keys in _KINDS.items():
            if any(s in e for s in keys):
                out[k].append(e)
                break
        else:
            out[4].append(e)
    return out


# shared runs -------------------------------------------------------------------


UNIFORM_SEEDS = range(20)
DOUBLING_LEVELS = range(1, 11)


@pytest.fixture(scope="module")
def tnet_suites():
    """Recourse runs with reference cross-checks, replayed from their traces."""
    runs = []
    cases = [(f"uniform n=200 seed={s}", generate("uniform", {"n": 200, "m": 400}, [s]))
             for s in UNIFORM_SEEDS]
    cases += [(f"doubling levels={L}", generate("doubling", {"levels": L}, [0, L]))
              for L in DOUBLING_LEVELS]
    for label, inst in cases:
        out = run_algorithm(inst, "recourse", t=T, check_reference=True)
        tf = _roundtrip("recourse", inst, out, t=T)
        errs = _classify(check_invariants_trace(tf))
        runs.append({"label": label, "inst": inst, "out": out, "trace": tf, "errs": errs})
    return runs


SCALING_SIZES = (128, 256, 512, 1024, 2048, 4096)
SCALING_SEEDS = range(20)


@pytest.fixture(scope="module")
def scaling_suite():
    t0 = time.perf_counter()
    rows = {n: [] for n in SCALING_SIZES}
    for n in SCALING_SIZES:
        for s in SCALING_SEEDS:
            inst = generate("uniform", {"n": n, "m": 2 * n}, [7, n, s])
            out = run_algorithm(inst, "recourse", t=T)
            rows[n].append((out.metrics, block_report_for(out.state)))
    return rows, time.perf_counter() - t0


EPSILONS = (F(1), F(1, 2), F(1, 4))
ALT_INSTANCES = 100


@pytest.fixture(scope="module")
def alternating_suite():
    runs = []
    for e_idx, eps in enumerate(EPSILONS):
        rng = make_rng([11, e_idx])
        for j in range(ALT_INSTANCES):
            n = int(rng.integers(1, 501))
            gap_max = int(rng.choice([2, 10, 100, 1000]))
            inst = generate("alternating", {"n": n, "gap_max": gap_max}, [11, e_idx, j])
            out = run_algorithm(inst, "alt-recourse", eps=eps)
            tf = _roundtrip("alt-recourse", inst, out, t=out.state.t, eps=eps, k=out.state.k)
            runs.append((eps, inst, out, tf))
    return runs


# criteria ----------------------------------------------------------------------


def test_criterion_01_oracle_equivalence():
    rng = make_rng([1])
    t0 = time.perf_counter()
    bad = []
    for j in range(1000):
        n = int(rng.integers(1, 8))
        m = int(rng.integers(n, 10))
        span = int(rng.choice([3, 10, 1000]))
        den = int(rng.choice([1, 1, 2, 3]))
        S = [F(int(x), den) for x in rng.integers(0, span, size=m)]
        R = [F(int(x), den) for x in rng.integers(0, span, size=n)]
        if opt_dp(S, R).cost != opt_brute(S, R):
            bad.append(j)
    dt = time.perf_counter() - t0
    report(1, not bad and dt < 10, f"{len(bad)} mismatches in 1000 instances, {dt:.2f} s (limit 10 s)")


def test_criterion_02_offline_prefix_bound(tnet_suites):
    viol, opt_bad = [], []
    for run in tnet_suites:
        viol += [f"{run['label']}: {e}" for e in run["errs"][2]]
        inst = run["inst"]
        # recorded OPT_i against an independent per-prefix optimum
        for o in run["trace"].steps:
            i = o["i"]
            if F(o["opt"]) != opt_dp(inst.servers, inst.requests[: i + 1]).cost:
                opt_bad.append(f"{run['label']} @ {i}")
    ok = not viol and not opt_bad
    report(2, ok, f"{len(viol)} violations, {len(opt_bad)} OPT_i mismatches over {len(tnet_suites)} runs"
                  + (f"; first: {(viol + opt_bad)[0]}" if not ok else ""))


def test_criterion_03_engine_agreement(tnet_suites):
    queries = sum(r["inst"].n for r in tnet_suites)
    bad = [(r["label"], r["out"].metrics.extra["engine_mismatches"]) for r in tnet_suites
           if r["out"].metrics.extra["engine_mismatches"]]
    report(3, not bad, f"{sum(c for _, c in bad)} discrepancies over {queries} queries"
                       + (f"; {bad[:3]}" if bad else ""))


def test_criterion_04_structural_invariants(tnet_suites):
    viol = [f"{r['label']}: {e}" for r in tnet_suites for e in r["errs"][4]]
    paths = sum(len(r["trace"].steps) for r in tnet_suites)
    report(4, not viol, f"{len(viol)} violations over {paths} recorded paths"
                        + (f"; first: {viol[0]}" if viol else ""))


def test_criterion_05_recourse_soundness(tnet_suites):
    viol = [f"{r['label']}: {e}" for r in tnet_suites for e in r["errs"][5]]
    sweeps = sum(r["out"].metrics.sweeps for r in tnet_suites)
    snaps = sum(r["out"].metrics.snaps for r in tnet_suites)
    report(5, not viol, f"{len(viol)} violations; consistency sweeps {sweeps} (reported only), "
                        f"snaps {snaps}"
                        + (f"; first: {viol[0]}" if viol else ""))


def _plateau_instance(j):
    """A few costly requests, then zero-cost arrivals far away: OPT stays flat
    long enough for early frozen edges to cross OPT_j / j and unfreeze."""
    rng = make_rng([6, j])
    b = int(rng.integers(3, 9))
    tail = int(rng.integers(50, 300))
    S = [int(x) for x in rng.integers(0, 1000, size=b + int(rng.integers(0, 4)))]
    R = [int(x) for x in rng.integers(0, 1000, size=b)]
    far = [10**6 + 3 * k for k in range(tail)]
    return Instance(tuple(S + far), tuple(R + far))


def test_criterion_06_freeze_persistence(tnet_suites):
    viol = [f"{r['label']}: {e}" for r in tnet_suites for e in r["errs"][6]]
    freezes = sum(r["out"].metrics.freezes for r in tnet_suites)
    unfreezes = sum(r["out"].metrics.unfreezes for r in tnet_suites)
    # the suites above almost never unfreeze, so add a family that does
    extra_pairs = other = 0
    for j in range(100):
        inst = _plateau_instance(j)
        out = run_algorithm(inst, "recourse", t=T)
        errs = _classify(check_invariants_trace(_roundtrip("recourse", inst, out, t=T)))
        viol += [f"plateau {j}: {e}" for e in errs[6]]
        other += sum(len(errs[k]) for k in (2, 4, 5))
        extra_pairs += out.metrics.unfreezes
    ok = not viol and not other and extra_pairs > 0
    report(6, ok, f"{len(viol)} violations; suites: {freezes} freezes, {unfreezes} unfreezes; "
                  f"plateau family: {extra_pairs} freeze/unfreeze pairs, {other} other violations"
                  + (f"; first: {viol[0]}" if viol else ""))


def _nlogn(n):
    return n * math.log2(n)


def test_criterion_07_scaling(scaling_suite):
    rows, elapsed = scaling_suite
    ratio = {n: statistics.median(float(m.ratio) for m, _ in rows[n]) for n in rows}
    recr = {n: statistics.median(m.total_reassign / _nlogn(n) for m, _ in rows[n]) for n in rows}
    lo, hi = SCALING_SIZES[0], SCALING_SIZES[-1]
    ok = ratio[hi] <= F(3, 2) * ratio[lo] and recr[hi] <= F(6, 5) * recr[lo] and elapsed <= 600
    table = " ".join(f"{n}:{ratio[n]:.3f}/{recr[n]:.4f}" for n in SCALING_SIZES)
    report(7, ok, f"median ratio {ratio[hi]:.4f} vs 1.5 x {ratio[lo]:.4f}; "
                  f"median reassign/(n log2 n) {recr[hi]:.4f} vs 1.2 x {recr[lo]:.4f}; "
                  f"{elapsed:.0f} s (limit 600); n:ratio/recourse {table}")


def test_criterion_08_alternating_near_optimality(alternating_suite):
    viol = []
    for eps, inst, out, _ in alternating_suite:
        m = out.metrics
        assert out.state.k == min_k(eps)
        if m.cost > (1 + eps) * m.opt:
            viol.append(f"eps={eps} n={inst.n}: cost {m.cost} > (1+eps) {m.opt}")
        if m.max_reassign > out.state.k:
            viol.append(f"eps={eps} n={inst.n}: {m.max_reassign} reassignments > k={out.state.k}")
    worst = max(float(o.metrics.ratio) for _, _, o, _ in alternating_suite)
    report(8, not viol, f"{len(viol)} violations over {len(alternating_suite)} runs "
                        f"(eps in 1, 1/2, 1/4); worst ratio {worst:.4f}"
                        + (f"; first: {viol[0]}" if viol else ""))


def _mutate(tf, idx, **fields):
    lines = [json.dumps(tf.header)]
    for j, o in enumerate(tf.steps):
        lines.append(json.dumps({**o, **fields} if j == idx else o))
    lines.append(json.dumps(tf.summary))
    return read_trace(io.StringIO("\n".join(lines)))


def _negative_controls(alternating_suite):
    """Corrupted copies of real traces; each must trip its checker."""
    controls = []
    eps, inst, out, tf = next(r for r in alternating_suite if r[1].n >= 20)
    steps = tf.steps
    # (i) the last arrival matched straight to the farthest server
    last = steps[-1]["i"]
    far = max(range(inst.m), key=lambda s: abs(inst.servers[s] - inst.requests[last]))
    controls.append(("path check, non-minimal edge", check_lemma6_trace,
                     _mutate(tf, len(steps) - 1, path=[last, far])))
    # (iii) a step whose path is recorded on the wrong side
    j = next(j for j, o in enumerate(steps) if len(o["path"]) >= 4)
    other = "R" if steps[j]["side"] == "L" else "L"
    controls.append(("path check, flipped side", check_lemma6_trace, _mutate(tf, j, side=other)))
    # forest check: a segment crossing an earlier one breaks laminarity of the forest
    a, b = (F(x) for x in steps[0]["segment"])
    cross = [str((a + b) / 2), str(b + (b - a) + 1)]
    controls.append(("forest check, crossing segment", check_lemma7_trace, _mutate(tf, 1, segment=cross)))
    # forest check: grandchildren totalling 9 under a root of length 10 at t = 3/2
    eps1 = next(tf for e, i, _, tf in alternating_suite if e == 1 and i.n >= 5)
    segs = [(0, 5), (5, 10), (0, F(9, 2)), (5, F(19, 2)), (0, 10)]
    lines = [json.dumps(eps1.header)]
    lines += [json.dumps({**o, "segment": [str(F(a)), str(F(b))]})
              for o, (a, b) in zip(eps1.steps, segs)]
    controls.append(("forest check, shallow root", check_lemma7_trace,
                     read_trace(io.StringIO("\n".join(lines)))))
    return controls


def test_criterion_09_lemma_checkers(alternating_suite):
    viol = []
    for eps, inst, _, tf in alternating_suite:
        viol += [f"eps={eps} n={inst.n}: lemma6 {v}" for v in check_lemma6_trace(tf)]
        viol += [f"eps={eps} n={inst.n}: lemma7 {v}" for v in check_lemma7_trace(tf)]
    controls = _negative_controls(alternating_suite)
    missed = [name for name, check, bad in controls if not check(bad)]
    ok = not viol and not missed
    report(9, ok, f"{len(viol)} violations on {len(alternating_suite)} runs; "
                  f"{len(controls) - len(missed)}/{len(controls)} negative controls caught"
                  + (f"; missed {missed}" if missed else "") + (f"; first: {viol[0]}" if viol else ""))


def test_criterion_10_block_bound(scaling_suite):
    rows, _ = scaling_suite
    reps = [rep for n in rows for _, rep in rows[n]]
    bad = [rep for rep in reps if not rep.passed]
    worst = max(float(rep.total / rep.opt) for rep in reps if rep.opt)
    report(10, not bad, f"{len(bad)} failures over {len(reps)} runs; "
                        f"worst sum(top-block OPT)/OPT {worst:.4f} (limit 6)")


DELTA_EXPONENTS = (4, 8, 12)
DELTA_N = 8
DELTA_SEEDS = range(30)


def test_criterion_11_log_delta_trend():
    med = {}
    for e in DELTA_EXPONENTS:
        vals = []
        for s in DELTA_SEEDS:
            inst = generate("alternating-delta", {"n": DELTA_N, "log2_delta": e}, [13, e, s])
            m = run_algorithm(inst, "online-tnet", t=T).metrics
            vals.append(float(m.ratio) / (1 + math.log2(m.delta)))
        med[e] = statistics.median(vals)
    lo, hi = DELTA_EXPONENTS[0], DELTA_EXPONENTS[-1]
    ok = med[hi] <= 2 * med[lo]
    report(11, ok, " ".join(f"2^{e}:{med[e]:.4f}" for e in DELTA_EXPONENTS)
                   + f"; largest {med[hi]:.4f} vs 2 x smallest {med[lo]:.4f}")


def test_criterion_12_min_k():
    tested = [F(1), F(1, 2), F(1, 4), F(2), F(1, 8), F(3, 7)]
    bad = []
    for eps in tested:
        k = min_k(eps)
        if not k_condition(eps, k) or (k > 1 and k_condition(eps, k - 1)):
            bad.append(str(eps))
    ok = not bad and min_k(1) == 16
    report(12, ok, ", ".join(f"min_k({e})={min_k(e)}" for e in tested)
                   + (f"; not minimal for {bad}" if bad else ""))


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", *sys.argv[1:]]))
