"""Per-run metrics and run-level diagnostics."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Optional, Sequence

from linerecourse.alternating import AltState, delta, is_alternating
from linerecourse.interval_levels import TRIVIAL, LevelInterval
from linerecourse.line_model import Instance
from linerecourse.opt_oracle import opt_dp
from linerecourse.recourse import RecourseState
from linerecourse.tnet_runner import RunnerState, arrive_tnet

ALGORITHMS = ("online-tnet", "offline-tnet", "recourse", "alt-recourse", "opt")


@dataclass
class RunMetrics:
    algo: str
    n: int
    m: int
    cost: Fraction
    opt: Fraction
    total_reassign: int = 0
    max_reassign: int = 0
    freezes: int = 0
    unfreezes: int = 0
    repairs: int = 0
    snaps: int = 0
    sweeps: int = 0
    recourse_steps: int = 0
    max_level: Optional[int] = None
    level_span: float = 0.0
    delta: Optional[Fraction] = None
    wall_time: float = 0.0
    extra: dict = field(default_factory=dict)

    @property
    def ratio(self) -> Optional[Fraction]:
        if self.opt > 0:
            return self.cost / self.opt
        return Fraction(1) if self.cost == 0 else None


@dataclass
class RunOutput:
    metrics: RunMetrics
    state: Any


@dataclass
class BlockReport:
    blocks: list[list[int]]
    block_opts: list[Fraction]
    total: Fraction
    opt: Fraction
    bound: Fraction

    @property
    def passed(self) -> bool:
        return self.total <= self.bound

    @property
    def ratio(self) -> Optional[Fraction]:
        return self.total / self.opt if self.opt > 0 else None


def top_blocks(level_intervals: Sequence[LevelInterval]) -> list[list[int]]:
    """Owners of the current top blocks of a laminar level-interval family.

    A top block's outermost interval is maximal in the family, and the block
    consists of the same-level intervals nested inside it.
    """
    items = [li for li in level_intervals if li.level is not TRIVIAL and li.interval is not None]
    items.sort(key=lambda li: (li.interval[0], -li.interval[1], li.owner))
    blocks = []
    k = 0
    while k < len(items):
        top = items[k]
        lo, hi = top.interval
        block = [top.owner]
        k += 1
        while k < len(items) and items[k].interval[1] <= hi and items[k].interval[0] < hi:
            if items[k].level == top.level:
                block.append(items[k].owner)
            k += 1
        blocks.append(sorted(block))
    return blocks


def check_block_opt_bound(inst: Instance, level_intervals: Sequence[LevelInterval],
                          m_on: dict, t, opt: Optional[Fraction] = None) -> BlockReport:
    """Sum of the top blocks' optimal costs against ``2t * OPT``.

    Each block's sub-instance holds its requests and their online servers.
    """
    t = Fraction(t)
    if opt is None:
        opt = opt_dp(inst.servers, inst.requests[: len(m_on)]).cost
    blocks = top_blocks(level_intervals)
    opts = []
    for b in blocks:
        S = [inst.servers[m_on[r]] for r in b]
        R = [inst.requests[r] for r in b]
        opts.append(opt_dp(S, R).cost)
    total = sum(opts, Fraction(0))
    return BlockReport(blocks, opts, total, opt, 2 * t * opt)


def block_report_for(state: RecourseState) -> BlockReport:
    st = state.runner
    return check_block_opt_bound(state.inst, st.levels.history, st.m_on, st.t,
                                 st.opt[-1] if st.opt else Fraction(0))


def _count(events, kind) -> int:
    return sum(1 for e in events if e.kind == kind)


def run_algorithm(inst: Instance, algo: str, t=3, eps=None, k=None,
                  check_reference: bool = False) -> RunOutput:
    """Run one algorithm on one instance and collect its metrics."""
    t0 = time.perf_counter()
    d = None
    if algo in ("alt-recourse",) or (is_alternating(inst) and inst.n > 0):
        try:
            d = delta(inst)
        except ValueError:
            d = None
    if algo in ("online-tnet", "offline-tnet"):
        st = RunnerState(inst, t, check_reference=check_reference)
        for r in range(inst.n):
            arrive_tnet(st, r)
        cost = st.on_cost() if algo == "online-tnet" else st.off_cost()
        opt = st.opt[-1] if st.opt else Fraction(0)
        levels = [rec.level for rec in st.records if rec.level is not TRIVIAL]
        met = RunMetrics(algo, inst.n, inst.m, cost, opt,
                         max_level=max(levels) if levels else None, delta=d)
        met.extra["engine_mismatches"] = st.engine_mismatches
        out = RunOutput(met, st)
    elif algo == "recourse":
        st = RecourseState(inst, t, check_reference=check_reference)
        for r in range(inst.n):
            st.arrive(r)
        opt = st.runner.opt[-1] if st.runner.opt else Fraction(0)
        ev = st.events
        levels = [li.level for li in st.runner.levels.history if li.level is not TRIVIAL]
        met = RunMetrics(algo, inst.n, inst.m, st.cost(), opt,
                         total_reassign=st.total_reassign, max_reassign=max(st.reassign, default=0),
                         freezes=_count(ev, "freeze"), unfreezes=_count(ev, "unfreeze"),
                         repairs=_count(ev, "repair"), snaps=st.snap_count,
                         sweeps=st.sweep_count, recourse_steps=st.recourse_steps,
                         max_level=max(levels) if levels else None,
                         level_span=st.level_span, delta=d)
        met.extra["engine_mismatches"] = st.runner.engine_mismatches
        out = RunOutput(met, st)
    elif algo == "alt-recourse":
        st = AltState(inst, 1 if eps is None else eps, k)
        for r in range(inst.n):
            st.arrive(r)
        opt = opt_dp(inst.servers, inst.requests).cost
        met = RunMetrics(algo, inst.n, inst.m, st.cost(), opt,
                         total_reassign=sum(st.reassign), max_reassign=max(st.reassign, default=0),
                         freezes=len(st.pinned), delta=d)
        met.extra["k"] = st.k
        out = RunOutput(met, st)
    elif algo == "opt":
        res = opt_dp(inst.servers, inst.requests)
        met = RunMetrics(algo, inst.n, inst.m, res.cost, res.cost, delta=d)
        out = RunOutput(met, res)
    else:
        raise ValueError(f"unknown algorithm {algo!r}; expected one of {ALGORITHMS}")
    out.metrics.wall_time = time.perf_counter() - t0
    return out
