"""``linerecourse`` command line: gen, run, check, sweep.

Exit codes: 0 success, 1 invariant violation, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional, Sequence

from linerecourse.harness.experiment import ExperimentConfig, emit_csv, emit_plot_data, run_experiment
from linerecourse.harness.generators import GENERATORS, generate
from linerecourse.harness.metrics import ALGORITHMS, RunMetrics, run_algorithm
from linerecourse.harness.traces import SUITES, TraceError, load_trace, run_suite, write_trace
from linerecourse.line_model import Instance, InstanceError, format_rat, parse_rat
from linerecourse.tnet_runner import InvariantViolation

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE = 0, 1, 2


def _rat_arg(text: str):
    try:
        return parse_rat(text)
    except (InstanceError, ValueError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def metrics_json(m: RunMetrics) -> dict:
    def r(x):
        return None if x is None else format_rat(x)

    return {"algo": m.algo, "n": m.n, "m": m.m, "cost": r(m.cost), "opt": r(m.opt),
            "ratio": r(m.ratio), "total_reassign": m.total_reassign,
            "max_reassign": m.max_reassign, "freezes": m.freezes, "unfreezes": m.unfreezes,
            "repairs": m.repairs, "snaps": m.snaps, "sweeps": m.sweeps,
            "recourse_steps": m.recourse_steps, "max_level": m.max_level,
            "level_span": m.level_span, "delta": r(m.delta), "wall_time": m.wall_time,
            "extra": m.extra}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="linerecourse",
                                description="Online min-cost matching on the line with recourse.")
    sub = p.add_subparsers(dest="cmd", required=True)

    g = sub.add_parser("gen", help="generate an instance as JSON")
    g.add_argument("--generator", choices=sorted(GENERATORS), default="uniform")
    g.add_argument("--n", type=int)
    g.add_argument("--m", type=int)
    g.add_argument("--range", type=int, default=10**6)
    g.add_argument("--levels", type=int)
    g.add_argument("--gap-max", type=int, default=100)
    g.add_argument("--log2-delta", type=int)
    g.add_argument("--seed", type=int, nargs="+", default=[0])
    g.add_argument("-o", "--out", help="output path (default: stdout)")

    r = sub.add_parser("run", help="run one algorithm on an instance")
    r.add_argument("--algo", choices=ALGORITHMS, required=True)
    r.add_argument("--instance", required=True)
    r.add_argument("--t", type=_rat_arg, default=parse_rat(3))
    r.add_argument("--eps", type=_rat_arg)
    r.add_argument("--k", type=int)
    r.add_argument("--check-reference", action="store_true",
                   help="cross-check every search against the reference engine")
    r.add_argument("--trace-out")
    r.add_argument("--metrics-out")

    c = sub.add_parser("check", help="replay a trace and run a check suite")
    c.add_argument("--trace", required=True)
    c.add_argument("--suite", choices=SUITES, action="append", required=True)

    s = sub.add_parser("sweep", help="run an experiment config, write CSV and plot data")
    s.add_argument("config")
    s.add_argument("--csv", help="override the CSV output path")
    s.add_argument("--plot", help="override the plot-data output path")
    return p


def _gen_params(a) -> dict:
    need = {"uniform": ["n"], "doubling": ["levels"], "alternating": ["n"],
            "alternating-delta": ["n", "log2_delta"]}[a.generator]
    missing = [k for k in need if getattr(a, k) is None]
    if missing:
        raise InstanceError(f"generator {a.generator} needs --{', --'.join(k.replace('_', '-') for k in missing)}")
    return {"n": a.n, "m": a.m if a.m is not None else a.n, "range": a.range, "levels": a.levels,
            "gap_max": a.gap_max, "log2_delta": a.log2_delta}


def cmd_gen(a) -> int:
    inst = generate(a.generator, _gen_params(a), a.seed)
    text = inst.dumps() + "\n"
    if a.out:
        with open(a.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_run(a) -> int:
    inst = Instance.load(a.instance)
    try:
        out = run_algorithm(inst, a.algo, t=a.t, eps=a.eps, k=a.k,
                            check_reference=a.check_reference)
    except InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_VIOLATION
    m = out.metrics
    if a.trace_out:
        t, eps = a.t, a.eps
        if a.algo == "alt-recourse":
            eps, t = out.state.eps, out.state.t
        with open(a.trace_out, "w") as fh:
            write_trace(fh, a.algo, inst, out.state, t=t, eps=eps, k=m.extra.get("k", a.k),
                        cost=m.cost, opt=m.opt)
    if a.metrics_out:
        with open(a.metrics_out, "w") as fh:
            json.dump(metrics_json(m), fh, indent=1, sort_keys=True)
            fh.write("\n")
    ratio = m.ratio
    print(f"{m.algo}: n={m.n} cost={format_rat(m.cost)} opt={format_rat(m.opt)} "
          f"ratio={'-' if ratio is None else f'{float(ratio):.6g}'} "
          f"reassign={m.total_reassign}")
    if m.extra.get("engine_mismatches"):
        print("engine mismatch detected", file=sys.stderr)
        return EXIT_VIOLATION
    return EXIT_OK


def cmd_check(a) -> int:
    tf = load_trace(a.trace)
    ok_all = True
    for suite in a.suite:
        ok, lines = run_suite(tf, suite)
        ok_all &= ok
        print(f"{suite}: {'PASS' if ok else 'FAIL'}")
        for ln in lines:
            print(f"  {ln}")
    return EXIT_OK if ok_all else EXIT_VIOLATION


def cmd_sweep(a) -> int:
    cfg = ExperimentConfig.load(a.config)
    csv_path = a.csv or cfg.csv_path
    plot_path = a.plot or cfg.plot_path
    if not csv_path and not plot_path:
        raise InstanceError("config names no outputs; pass --csv or --plot")
    rows = run_experiment(cfg)
    if csv_path:
        emit_csv(rows, csv_path)
    if plot_path:
        emit_plot_data(rows, plot_path)
    print(f"{len(rows)} runs")
    return EXIT_OK


COMMANDS = {"gen": cmd_gen, "run": cmd_run, "check": cmd_check, "sweep": cmd_sweep}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.cmd](args)
    except InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_VIOLATION
    except (InstanceError, TraceError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
