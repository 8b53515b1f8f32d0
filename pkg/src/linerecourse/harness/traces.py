"""Self-describing JSONL run traces and the checks that replay them.

A trace starts with a header line (algorithm, parameters, instance), then
one ``step`` line per arrival, then ``event`` lines for recourse runs, and a
closing ``summary`` line.  Every check below works from the file alone.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import IO, Any, Optional

from linerecourse.alternating import (
    AltRecord,
    PathForest,
    PathForestNode,
    Violation,
    check_lemma6,
    check_lemma7,
    forest_insert,
)
from linerecourse.interval_levels import TRIVIAL, LaminarityError, LevelInterval, check_laminar
from linerecourse.line_model import AltPath, Instance, InstanceError, format_rat, parse_rat
from linerecourse.opt_oracle import opt_dp
from linerecourse.tnet_search import co_net_cost, t_net_cost

TRACE_FORMAT = "linerecourse-trace"
TRACE_VERSION = 1
SUITES = ("lemma6", "lemma7", "blocks", "invariants")

_MOVES = ("assign", "repair", "snap", "recourse", "sweep")


class TraceError(ValueError):
    """The trace file is malformed or does not fit the requested suite."""


def _rat_or_none(x):
    return None if x is None else format_rat(parse_rat(x))


def write_trace(fh: IO[str], algo: str, inst: Instance, state: Any, *, t=None, eps=None,
                k=None, cost: Optional[Fraction] = None, opt: Optional[Fraction] = None) -> None:
    header = {"type": "header", "format": TRACE_FORMAT, "version": TRACE_VERSION,
              "algo": algo, "t": _rat_or_none(t), "eps": _rat_or_none(eps), "k": k,
              "instance": inst.to_json_obj()}
    fh.write(json.dumps(header) + "\n")
    if algo in ("online-tnet", "offline-tnet", "recourse"):
        records = state.runner.records if algo == "recourse" else state.records
        for rec in records:
            fh.write(json.dumps({"type": "step", **rec.to_json_obj()}) + "\n")
    elif algo == "alt-recourse":
        for rec in state.records:
            fh.write(json.dumps({"type": "step", **rec.to_json_obj()}) + "\n")
    if algo == "recourse":
        for ev in state.events:
            fh.write(json.dumps({"type": "event", **ev.to_json_obj()}) + "\n")
    summary = {"type": "summary", "cost": _rat_or_none(cost), "opt": _rat_or_none(opt)}
    fh.write(json.dumps(summary) + "\n")


@dataclass
class TraceFile:
    header: dict
    inst: Instance
    steps: list[dict] = field(default_factory=list)
    events: list[dict] = field(default_factory=list)
    summary: dict = field(default_factory=dict)

    @property
    def algo(self) -> str:
        return self.header["algo"]

    @property
    def t(self) -> Optional[Fraction]:
        v = self.header.get("t")
        return None if v is None else parse_rat(v)

    @property
    def eps(self) -> Optional[Fraction]:
        v = self.header.get("eps")
        return None if v is None else parse_rat(v)


def read_trace(fh: IO[str]) -> TraceFile:
    lines = [ln for ln in fh.read().splitlines() if ln.strip()]
    if not lines:
        raise TraceError("empty trace")
    try:
        objs = [json.loads(ln) for ln in lines]
    except json.JSONDecodeError as exc:
        raise TraceError(f"bad JSON in trace: {exc}") from exc
    head = objs[0]
    if head.get("type") != "header" or head.get("format") != TRACE_FORMAT:
        raise TraceError("trace has no header line")
    if head.get("version") != TRACE_VERSION:
        raise TraceError(f"unsupported trace version {head.get('version')}")
    tf = TraceFile(head, Instance.from_json_obj(head["instance"]))
    for o in objs[1:]:
        kind = o.get("type")
        if kind == "step":
            tf.steps.append(o)
        elif kind == "event":
            tf.events.append(o)
        elif kind == "summary":
            tf.summary = o
        else:
            raise TraceError(f"unknown line type {kind!r}")
    return tf


def load_trace(path) -> TraceFile:
    with open(path) as fh:
        return read_trace(fh)


# conversions -----------------------------------------------------------------


def alt_records(tf: TraceFile) -> list[AltRecord]:
    if tf.algo != "alt-recourse":
        raise TraceError(f"suite needs an alt-recourse trace, got {tf.algo}")
    out = []
    for o in tf.steps:
        seg = (parse_rat(o["segment"][0]), parse_rat(o["segment"][1]))
        out.append(AltRecord(o["i"], tuple(o["path"]), parse_rat(o["phi"]), o["side"], seg,
                             [tuple(p) for p in o["pinned"]], [tuple(c) for c in o["changed"]]))
    return out


def _tnet_steps(tf: TraceFile) -> list[dict]:
    if tf.algo not in ("online-tnet", "offline-tnet", "recourse"):
        raise TraceError(f"suite needs a t-net or recourse trace, got {tf.algo}")
    return tf.steps


def level_intervals(tf: TraceFile) -> list[LevelInterval]:
    out = []
    for o in _tnet_steps(tf):
        li = o["li"]
        iv = None if li is None else (parse_rat(li[0]), parse_rat(li[1]))
        out.append(LevelInterval(o["i"], iv, TRIVIAL if o["level"] is None else o["level"]))
    return out


# suites ----------------------------------------------------------------------


def check_lemma6_trace(tf: TraceFile) -> list[Violation]:
    return check_lemma6(alt_records(tf), tf.inst)


def check_lemma7_trace(tf: TraceFile) -> list[Violation]:
    recs = alt_records(tf)
    t = 1 + tf.eps / 2
    forest = PathForest()
    out = []
    for rec in recs:
        try:
            forest_insert(forest, PathForestNode(rec.i, rec.segment, rec.side))
        except AssertionError as exc:
            out.append(Violation("lemma7", rec.i, str(exc)))
            return out
    return out + check_lemma7(forest, t)


def check_blocks_trace(tf: TraceFile):
    from linerecourse.harness.metrics import check_block_opt_bound

    steps = _tnet_steps(tf)
    m_on = {o["m_on"][0]: o["m_on"][1] for o in steps}
    opt = parse_rat(steps[-1]["opt"]) if steps else Fraction(0)
    return check_block_opt_bound(tf.inst, level_intervals(tf), m_on, tf.t, opt)


def check_invariants_trace(tf: TraceFile) -> list[str]:
    if tf.algo == "alt-recourse":
        return _alt_invariants(tf)
    if tf.algo == "opt":
        return []
    return _tnet_invariants(tf) + (_recourse_invariants(tf) if tf.algo == "recourse" else [])


def _tnet_invariants(tf: TraceFile) -> list[str]:
    inst, t = tf.inst, tf.t
    R, S = inst.requests, inst.servers
    errs = []
    off: dict[int, int] = {}
    on_used: set[int] = set()
    cost = Fraction(0)
    for o in tf.steps:
        i = o["i"]
        try:
            P = AltPath(tuple(o["path"]))
            phi = t_net_cost(P, off, t, inst)
            psi = co_net_cost(P, off, t, inst)
        except (InstanceError, ValueError) as exc:
            errs.append(f"arrival {i}: bad path: {exc}")
            continue
        rec_phi = parse_rat(o["phi"])
        if phi != rec_phi:
            errs.append(f"arrival {i}: recorded phi {rec_phi} != recomputed {phi}")
        if phi < 0:
            errs.append(f"arrival {i}: negative phi {phi}")
        if psi + phi != (t - 1) * P.cost(inst):
            errs.append(f"arrival {i}: psi + phi != (t-1) c(P)")
        for r, s in o["m_off_removed"]:
            if off.get(r) == s:
                del off[r]
                cost -= abs(R[r] - S[s])
        for r, s in o["m_off_added"]:
            off[r] = s
            cost += abs(R[r] - S[s])
        if cost > t * parse_rat(o["opt"]):
            errs.append(f"arrival {i}: c(M_off) = {cost} exceeds t * OPT_i")
        on_used.add(o["m_on"][1])
        if set(off.values()) != on_used:
            errs.append(f"arrival {i}: free servers of M_off and M_on differ")
    try:
        check_laminar(li.interval for li in level_intervals(tf))
    except LaminarityError as exc:
        errs.append(f"level intervals not laminar: {exc}")
    return errs


def _recourse_invariants(tf: TraceFile) -> list[str]:
    inst, t = tf.inst, tf.t
    R, S = inst.requests, inst.servers
    opts = {o["i"]: parse_rat(o["opt"]) for o in tf.steps}
    m_on = {o["m_on"][0]: o["m_on"][1] for o in tf.steps}
    by_step: dict[int, list[dict]] = {}
    for ev in tf.events:
        by_step.setdefault(ev["i"], []).append(ev)
    errs = []
    M: dict[int, int] = {}
    frozen: dict[int, int] = {}
    froze_at: dict[int, int] = {}
    inactive: set[int] = set()
    for i in sorted(opts):
        for ev in by_step.get(i, []):
            kind, r = ev["kind"], ev["request"]
            if kind in _MOVES:
                M[r] = ev["to_server"]
            elif kind == "freeze":
                frozen[r] = ev["to_server"]
                froze_at[r] = i + 1
            elif kind == "unfreeze":
                frozen.pop(r, None)
                a = froze_at.pop(r, None)
                if a is not None and i + 1 < a * a:
                    errs.append(f"r{r} frozen at {a} and unfrozen at {i + 1} < {a}^2")
            elif kind == "inactive":
                inactive.add(r)
        opt = opts[i]
        if len(M) != i + 1 or len(set(M.values())) != len(M):
            errs.append(f"arrival {i}: output is not a matching of the arrived requests")
            continue
        for r, s in M.items():
            if (r in frozen or r not in inactive) and s != m_on[r]:
                errs.append(f"arrival {i}: r{r} is active or frozen but off its online edge")
        fc = sum((abs(R[r] - S[s]) for r, s in frozen.items()), Fraction(0))
        if fc > opt:
            errs.append(f"arrival {i}: c(M_f) = {fc} exceeds OPT_i = {opt}")
        ic = sum((abs(R[r] - S[M[r]]) for r in M if r in frozen or r in inactive), Fraction(0))
        if ic > (t + 2) * opt:
            errs.append(f"arrival {i}: inactive cost {ic} exceeds (t+2) OPT_i")
    return errs


def _alt_invariants(tf: TraceFile) -> list[str]:
    inst = tf.inst
    k = tf.header.get("k")
    eps = tf.eps
    errs = []
    M: dict[int, int] = {}
    count = [0] * inst.n
    for o in tf.steps:
        for q, _, new in o["changed"]:
            M[q] = new
            count[q] += 1
        # the arriving request takes the first server of its augmenting path
        M[o["i"]] = o["path"][1]
        if len(set(M.values())) != len(M):
            errs.append(f"arrival {o['i']}: output is not a matching")
    if k is not None:
        errs += [f"r{q} reassigned {c} > k = {k} times" for q, c in enumerate(count) if c > k]
    if len(M) == inst.n and eps is not None:
        cost = sum((abs(inst.requests[q] - inst.servers[s]) for q, s in M.items()), Fraction(0))
        opt = opt_dp(inst.servers, inst.requests).cost
        if cost > (1 + eps) * opt:
            errs.append(f"final cost {cost} exceeds (1+eps) OPT = {(1 + eps) * opt}")
    return errs


def run_suite(tf: TraceFile, suite: str):
    """Returns ``(ok, lines)`` for one suite on a loaded trace."""
    if suite == "lemma6":
        v = check_lemma6_trace(tf)
        return not v, [f"{x.part} @ r{x.i}: {x.witness}" for x in v]
    if suite == "lemma7":
        v = check_lemma7_trace(tf)
        return not v, [f"{x.part} @ r{x.i}: {x.witness}" for x in v]
    if suite == "blocks":
        rep = check_blocks_trace(tf)
        return rep.passed, [f"blocks={len(rep.blocks)} sum={format_rat(rep.total)} "
                            f"bound={format_rat(rep.bound)} opt={format_rat(rep.opt)}"]
    if suite == "invariants":
        errs = check_invariants_trace(tf)
        return not errs, errs
    raise TraceError(f"unknown suite {suite!r}; expected one of {SUITES}")
