"""Arrival-by-arrival driver for the offline and online t-net-cost matchers.

The offline matching follows the minimum t-net-cost augmenting path of
each arrival; the online matching keeps every request on the endpoint
server of its own path.  Both occupy the same server set at all times.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import IO, Optional

from linerecourse.interval_levels import (
    TRIVIAL,
    Coverage,
    LevelIndex,
    LevelInterval,
    assert_laminar_pair,
    make_level_interval,
)
from linerecourse.line_model import AltPath, Instance, InstanceError, Matching, format_rat
from linerecourse.opt_oracle import OptTracker
from linerecourse.tnet_search import PathSearch, TNetEngine, as_t


class InvariantViolation(AssertionError):
    """A property that must hold on every run did not."""


def default_eps(t: Fraction) -> Fraction:
    return 1 / (32 * t)


@dataclass
class StepRecord:
    i: int
    path: AltPath
    phi: Fraction
    si: Optional[tuple[Fraction, Fraction]]
    li: LevelInterval
    new_top_block: bool
    endpoint: int
    opt: Fraction
    off_added: list[tuple[int, int]] = field(default_factory=list)
    off_removed: list[tuple[int, int]] = field(default_factory=list)

    @property
    def level(self):
        return self.li.level

    def to_json_obj(self) -> dict:
        def iv(x):
            return None if x is None else [format_rat(x[0]), format_rat(x[1])]

        return {
            "i": self.i,
            "phi": format_rat(self.phi),
            "path": list(self.path.vertices),
            "si": iv(self.si),
            "li": iv(self.li.interval),
            "level": None if self.li.level is TRIVIAL else self.li.level,
            "m_off_added": [list(e) for e in self.off_added],
            "m_off_removed": [list(e) for e in self.off_removed],
            "m_on": [self.i, self.endpoint],
            "opt": format_rat(self.opt),
        }


class RunnerState:
    """Mutable state of one run: M^off, M^on, coverage, levels and OPT_i."""

    def __init__(self, inst: Instance, t, eps=None, compiled: Optional[bool] = None,
                 check_reference: bool = False, track_levels: bool = True):
        self.inst = inst
        self.t = as_t(t)
        self.eps = Fraction(eps) if eps is not None else default_eps(self.t)
        self.engine = TNetEngine(inst, self.t, compiled=compiled)
        self.opt_tracker = OptTracker(inst, compiled=compiled)
        self.m_on: dict[int, int] = {}
        self.records: list[StepRecord] = []
        self.coverage = Coverage()
        self.levels = LevelIndex()
        self.opt: list[Fraction] = []
        self.check_reference = check_reference
        self.track_levels = track_levels
        self.engine_mismatches = 0
        spos, rpos = inst.scaled
        self._spos, self._rpos = spos, rpos
        self.off_cost_scaled = 0
        self.on_cost_scaled = 0

    @property
    def i(self) -> int:
        return len(self.records)

    @property
    def m_off(self) -> dict[int, int]:
        return self.engine.m_off

    def off_cost(self) -> Fraction:
        return Fraction(self.off_cost_scaled, self.inst.scale)

    def on_cost(self) -> Fraction:
        return Fraction(self.on_cost_scaled, self.inst.scale)


def _path_delta(state: RunnerState, path: AltPath):
    sp, rp = state._spos, state._rpos
    v = path.vertices
    added = [(v[k], v[k + 1]) for k in range(0, len(v), 2)]
    removed = [(v[k + 2], v[k + 1]) for k in range(0, len(v) - 2, 2)]
    delta = sum(abs(rp[r] - sp[s]) for r, s in added) - sum(abs(rp[r] - sp[s]) for r, s in removed)
    return added, removed, delta


@dataclass
class PendingArrival:
    """Search result for an arrival whose augmentation is not yet applied."""

    r: int
    ps: PathSearch
    si: Optional[tuple[Fraction, Fraction]]
    li: LevelInterval
    new_top_block: bool
    opt: Fraction


def begin_arrival(state: RunnerState, r: int) -> PendingArrival:
    """OPT_i, the path search, SI_i and I_i; M^off is left untouched."""
    if r != state.i:
        raise InstanceError(f"expected arrival r{state.i}, got r{r}")
    opt_i = state.opt_tracker.arrive(r)
    state.opt.append(opt_i)
    ps: PathSearch = state.engine.search(r, want_si=state.track_levels)
    if ps.phi < 0:
        raise InvariantViolation(f"negative phi {ps.phi} at arrival {r}")
    if state.check_reference:
        ref = state.engine.reference_search(r)
        if ref.phi != ps.phi or ref.path != ps.path:
            state.engine_mismatches += 1
    si = ps.si if state.track_levels else None
    if state.track_levels:
        state.coverage.insert(si)
        li = make_level_interval(r, state.coverage, state.inst.requests[r], state.eps)
        if state.records:
            assert_laminar_pair(state.records[-1].li.interval, li.interval)
        ntb = state.levels.is_new_top_block(li)
        state.levels.add(li)
    else:
        li = LevelInterval(r, None, TRIVIAL)
        ntb = False
    return PendingArrival(r, ps, si, li, ntb, opt_i)


def finish_arrival(state: RunnerState, pend: PendingArrival) -> StepRecord:
    """Augment M^off along the path and extend M^on by its endpoint."""
    ps, r = pend.ps, pend.r
    added, removed, delta = _path_delta(state, ps.path)
    state.engine.augment(ps.path)
    state.off_cost_scaled += delta
    s = ps.endpoint
    state.m_on[r] = s
    state.on_cost_scaled += abs(state._rpos[r] - state._spos[s])
    t = state.t
    if state.off_cost_scaled * t.denominator > t.numerator * state.opt_tracker.scaled_cost:
        raise InvariantViolation(
            f"c(M_off) = {state.off_cost()} exceeds t*OPT = {t * pend.opt} at arrival {r}")
    rec = StepRecord(r, ps.path, ps.phi, pend.si, pend.li, pend.new_top_block, s, pend.opt,
                     added, removed)
    state.records.append(rec)
    return rec


def arrive_tnet(state: RunnerState, r: int) -> StepRecord:
    """Process arrival ``r`` (which must be the next request in order)."""
    return finish_arrival(state, begin_arrival(state, r))


@dataclass
class Trace:
    inst: Instance
    t: Fraction
    records: list[StepRecord]
    m_off: Matching
    m_on: Matching
    off_cost: Fraction
    on_cost: Fraction
    opt: list[Fraction]
    engine_mismatches: int = 0

    def write_jsonl(self, fh: IO[str]) -> None:
        for rec in self.records:
            fh.write(json.dumps(rec.to_json_obj()))
            fh.write("\n")


def _run(inst: Instance, t, **kw) -> Trace:
    st = RunnerState(inst, t, **kw)
    for r in range(inst.n):
        arrive_tnet(st, r)
    return Trace(inst, st.t, st.records, Matching(st.m_off), Matching(st.m_on),
                 st.off_cost(), st.on_cost(), st.opt, st.engine_mismatches)


def run_offline(inst: Instance, t, **kw) -> Trace:
    """Full run; the offline result is ``trace.m_off`` / ``trace.off_cost``."""
    return _run(inst, t, **kw)


def run_online(inst: Instance, t, **kw) -> Trace:
    """Full run; the online result is ``trace.m_on`` / ``trace.on_cost``."""
    return _run(inst, t, **kw)


def check_free_server_agreement(trace: Trace) -> list[str]:
    """Replay the trace and compare used server sets of M^off and M^on."""
    off: dict[int, int] = {}
    on_used: set[int] = set()
    errs = []
    for rec in trace.records:
        for r, s in rec.off_removed:
            if off.get(r) == s:
                del off[r]
        for r, s in rec.off_added:
            off[r] = s
        on_used.add(rec.endpoint)
        if set(off.values()) != on_used:
            errs.append(f"arrival {rec.i}: used server sets differ")
    return errs
