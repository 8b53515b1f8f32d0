"""Constant-competitive matching with recourse, driven by the t-net runner.

Every request is either *active* (it sits in a top block and keeps its
online server), *frozen* (its online edge is cheap relative to OPT_i and it
keeps its online server), or *detour* (inactive and matched along the
alternating component of M^off xor M^f that starts at its offline edge).

Costs and thresholds are compared on integers scaled by the instance's
common denominator.
"""

from __future__ import annotations

import heapq
import json
import math
from bisect import bisect_left, bisect_right, insort
from dataclasses import dataclass, field
from fractions import Fraction
from typing import IO, Iterable, Mapping, Optional

from linerecourse.line_model import Instance, Matching
from linerecourse.opt_oracle import opt_dp
from linerecourse.tnet_runner import (
    InvariantViolation,
    RunnerState,
    StepRecord,
    begin_arrival,
    finish_arrival,
)

ACTIVE = "active"
FROZEN = "frozen"
DETOUR = "detour"


class StructureError(RuntimeError):
    """A detour walk revisited a vertex."""


@dataclass
class Event:
    kind: str
    i: int
    request: int
    from_server: Optional[int] = None
    to_server: Optional[int] = None

    def to_json_obj(self) -> dict:
        return {"kind": self.kind, "i": self.i, "request": self.request,
                "from_server": self.from_server, "to_server": self.to_server}


def detour_target(m_off: Mapping[int, int], m_f: Mapping[int, int], r: int,
                  frozen_at: Optional[Mapping[int, int]] = None) -> int:
    """Terminal server of the walk r -> m_off[r] -> frozen holder -> m_off[holder] -> ...

    ``m_f`` maps frozen requests to their servers; ``frozen_at`` is its
    inverse and is derived when omitted.
    """
    if r in m_f:
        raise ValueError(f"request r{r} is frozen")
    holder = frozen_at if frozen_at is not None else {s: q for q, s in m_f.items()}
    seen = {r}
    s = m_off[r]
    while True:
        q = holder.get(s)
        if q is None:
            return s
        if q in seen:
            raise StructureError(f"detour walk from r{r} revisits r{q}")
        seen.add(q)
        s = m_off[q]


def component_start(m_off_inv: Mapping[int, int], m_f: Mapping[int, int], s: int) -> int:
    """Walk backwards from server ``s`` to the first non-frozen request."""
    seen = set()
    while True:
        q = m_off_inv[s]
        if q not in m_f:
            return q
        if q in seen:
            raise StructureError(f"backward walk from s{s} revisits r{q}")
        seen.add(q)
        s = m_f[q]


class _Inverse:
    """Read-only server -> request view over the engine's match array."""

    __slots__ = ("a",)

    def __init__(self, a):
        self.a = a

    def __getitem__(self, s):
        return int(self.a[s])


@dataclass
class RecourseStep:
    """Per-arrival summary for traces and metrics."""

    record: StepRecord
    events: list[Event] = field(default_factory=list)
    reassignments: int = 0


class RecourseState:
    """Output matching M with statuses, frozen set and recourse accounting."""

    def __init__(self, inst: Instance, t=3, eps=None, compiled: Optional[bool] = None,
                 check_reference: bool = False, check_every_step: bool = True):
        self.inst = inst
        self.runner = RunnerState(inst, t, eps=eps, compiled=compiled,
                                  check_reference=check_reference)
        self.t = self.runner.t
        self.spos, self.rpos = inst.scaled
        self.M: dict[int, int] = {}
        self.M_inv: dict[int, int] = {}
        self.inactive: set[int] = set()      # swept by some recourse step
        self.m_f: dict[int, int] = {}        # frozen request -> its online server
        self.frozen_at: dict[int, int] = {}  # server -> frozen request
        self.freeze_time: dict[int, int] = {}
        self.freeze_pairs: list[tuple[int, int, int]] = []  # (request, freeze i, unfreeze j)
        self.reassign: list[int] = [0] * inst.n
        self.total_reassign = 0
        self.events: list[Event] = []
        self.steps: list[RecourseStep] = []
        self.snap_count = 0
        self.sweep_count = 0
        self.recourse_steps = 0
        self.level_span = 0.0  # max (level(I_j) - level(I_r)) / log2 j over swept r
        self.check_every_step = check_every_step
        self._order: list[tuple] = []        # arrived (position, index), sorted
        self._cost_on: list[int] = [0] * inst.n
        self._free_heap: list[tuple[int, int, int]] = []    # (cost, r, version) not frozen
        self._frozen_heap: list[tuple[int, int, int]] = []  # (-cost, r, version)
        self._ver: list[int] = [0] * inst.n
        self.frozen_cost = 0     # scaled c(M^f)
        self.inactive_cost = 0   # scaled cost of M over frozen and detour requests
        self._cur: Optional[RecourseStep] = None
        self._i = 0

    # status bookkeeping ---------------------------------------------------

    def status(self, r: int) -> str:
        if r in self.m_f:
            return FROZEN
        return DETOUR if r in self.inactive else ACTIVE

    def _edge_cost(self, r: int, s: int) -> int:
        return abs(self.rpos[r] - self.spos[s])

    def _counts_inactive(self, r: int) -> bool:
        return r in self.m_f or r in self.inactive

    def _log(self, kind, r, a=None, b=None):
        ev = Event(kind, self._i, r, a, b)
        self.events.append(ev)
        if self._cur is not None:
            self._cur.events.append(ev)

    def _move(self, r: int, s: int, kind: str) -> None:
        """Reassign ``r`` to ``s`` (counted when the server changes)."""
        old = self.M.get(r)
        if old == s:
            return
        if self._counts_inactive(r):
            self.inactive_cost += self._edge_cost(r, s) - self._edge_cost(r, old)
        if self.M_inv.get(old) == r:
            del self.M_inv[old]
        self.M[r] = s
        self.M_inv[s] = r
        self.reassign[r] += 1
        self.total_reassign += 1
        if self._cur is not None:
            self._cur.reassignments += 1
        self._log(kind, r, old, s)

    def _mark_inactive(self, r: int) -> None:
        if r not in self.inactive:
            if r not in self.m_f:
                self.inactive_cost += self._edge_cost(r, self.M[r])
            self.inactive.add(r)
            self._log("inactive", r, self.M[r], self.M[r])

    def _freeze(self, r: int) -> None:
        s = self.runner.m_on[r]
        if not self._counts_inactive(r):
            self.inactive_cost += self._edge_cost(r, self.M[r])
        self.m_f[r] = s
        self.frozen_at[s] = r
        self.freeze_time[r] = self._i + 1
        self.frozen_cost += self._cost_on[r]
        self._ver[r] += 1
        heapq.heappush(self._frozen_heap, (-self._cost_on[r], r, self._ver[r]))
        self._log("freeze", r, self.M[r], s)
        if self.M[r] != s:
            # detour-matched request: snap it to its online edge
            self.snap_count += 1
            holder = self.M_inv.get(s)
            self._move(r, s, "snap")
            if holder is not None and holder != r:
                self._retarget([holder])

    def _unfreeze(self, r: int) -> None:
        s = self.m_f[r]
        j = self._i + 1
        self.freeze_pairs.append((r, self.freeze_time.pop(r), j))
        m_off = self.runner.m_off
        self._log("unfreeze", r, s, s)
        self._drop_frozen(r)
        if m_off[r] == s or r not in self.inactive:
            return
        # removing (r, s) splits its component into r' .. s and r .. s'
        s_end = detour_target(m_off, self.m_f, r, self.frozen_at)
        r_start = component_start(_Inverse(self.runner.engine.s_match), self.m_f, s)
        self._move(r, s_end, "repair")
        if r_start in self.inactive and r_start not in self.m_f:
            self._move(r_start, s, "repair")

    def _drop_frozen(self, r: int) -> None:
        s = self.m_f.pop(r)
        del self.frozen_at[s]
        self.frozen_cost -= self._cost_on[r]
        if r not in self.inactive:
            self.inactive_cost -= self._edge_cost(r, self.M[r])
        self._ver[r] += 1
        heapq.heappush(self._free_heap, (self._cost_on[r], r, self._ver[r]))

    def _retarget(self, reqs: Iterable[int]) -> None:
        m_off = self.runner.m_off
        for q in reqs:
            if q in self.inactive and q not in self.m_f:
                self._move(q, detour_target(m_off, self.m_f, q, self.frozen_at), "repair")

    # steps ----------------------------------------------------------------

    def update_freezing(self, opt_scaled: int, i: int) -> None:
        """Unfreeze on c > OPT_i / i, then freeze on c <= OPT_i / i^2."""
        fh = self._frozen_heap
        while fh:
            negc, r, v = fh[0]
            if v != self._ver[r] or r not in self.m_f:
                heapq.heappop(fh)
                continue
            if -negc * i > opt_scaled:
                heapq.heappop(fh)
                self._unfreeze(r)
            else:
                break
        h = self._free_heap
        ii = i * i
        while h:
            c, r, v = h[0]
            if v != self._ver[r] or r in self.m_f:
                heapq.heappop(h)
                continue
            if c * ii <= opt_scaled:
                heapq.heappop(h)
                self._freeze(r)
            else:
                break

    def recourse_step(self, interval, level=None) -> None:
        """Move every non-frozen request strictly inside ``interval`` to its detour target."""
        self.recourse_steps += 1
        history = self.runner.levels.history
        lo, hi = interval
        L = self.inst.scale
        a = bisect_right(self._order, (lo * L, float("inf")))
        b = bisect_left(self._order, (hi * L, -1))
        inside = [idx for pos, idx in self._order[a:b] if lo * L < pos < hi * L]
        m_off = self.runner.m_off
        targets = []
        j = self._i + 1
        for r in inside:
            self._mark_inactive(r)
            if r not in self.m_f:
                own = history[r].level
                if level is not None and j > 1 and not history[r].trivial:
                    span = (level - own) / math.log2(j)
                    if span > self.level_span:
                        self.level_span = span
                targets.append((r, detour_target(m_off, self.m_f, r, self.frozen_at)))
        self._log("recourse_step", self._i)
        # all targets are taken against the same state, then applied
        for r, s in targets:
            self._move(r, s, "recourse")
        # a swap inside the batch transiently drops index entries; rebuild them
        for r, _ in targets:
            self.M_inv.setdefault(self.M[r], r)

    def _consistency_sweep(self) -> None:
        """Re-derive M for detour requests when targets collided."""
        self.sweep_count += 1
        fixed = {}
        for r in self.M:
            if r in self.m_f or r not in self.inactive:
                fixed[r] = self.runner.m_on[r]
        used = set(fixed.values())
        m_off = self.runner.m_off
        want = {}
        claims: dict[int, int] = {}
        for r in self.M:
            if r in fixed:
                continue
            s = detour_target(m_off, self.m_f, r, self.frozen_at)
            want[r] = s
            claims[s] = claims.get(s, 0) + 1
        plan = dict(fixed)
        left = []
        for r, s in want.items():
            if s not in used and claims[s] == 1:
                plan[r] = s
            else:
                left.append(r)
        if left:
            taken = set(plan.values())
            free = [s for s in range(self.inst.m) if s not in taken]
            res = opt_dp([self.inst.servers[s] for s in free], [self.inst.requests[r] for r in left])
            for k, r in enumerate(left):
                plan[r] = free[res.matching[k]]
        self.M_inv = {}
        for r, s in plan.items():
            old = self.M[r]
            if old != s:
                if self._counts_inactive(r):
                    self.inactive_cost += self._edge_cost(r, s) - self._edge_cost(r, old)
                self.M[r] = s
                self.reassign[r] += 1
                self.total_reassign += 1
                if self._cur is not None:
                    self._cur.reassignments += 1
                self._log("sweep", r, old, s)
            self.M_inv[s] = r

    def arrive(self, r: int) -> RecourseStep:
        st = self.runner
        pend = begin_arrival(st, r)
        i = r + 1
        self._i = r
        self._cur = RecourseStep(record=None)  # record filled in below
        opt_scaled = st.opt_tracker.scaled_cost
        self.update_freezing(opt_scaled, i)
        if pend.new_top_block:
            self.recourse_step(pend.li.interval, pend.li.level)
        if len(self.M_inv) != len(self.M):
            self._consistency_sweep()
        rec = finish_arrival(st, pend)
        s = rec.endpoint
        if s in self.M_inv:
            raise InvariantViolation(f"arriving server s{s} already used by r{self.M_inv[s]}")
        self.M[r] = s
        self.M_inv[s] = r
        self._log("assign", r, None, s)
        c = self._edge_cost(r, s)
        self._cost_on[r] = c
        insort(self._order, (self.rpos[r], r))
        # the freezing pass covers M^on_(i-1); a new edge is frozen on arrival
        # only when it is free (it meets every threshold)
        if c == 0:
            self._freeze(r)
        else:
            heapq.heappush(self._free_heap, (c, r, self._ver[r]))
        if len(self.M_inv) != len(self.M):
            self._consistency_sweep()
        self._cur.record = rec
        step = self._cur
        self.steps.append(step)
        self._cur = None
        if self.check_every_step:
            self.check_invariants()
        return step

    # checks ---------------------------------------------------------------

    def check_invariants(self) -> list[str]:
        """Matching validity, c(M^f) <= OPT_i and inactive cost <= (t+2) OPT_i."""
        errs = []
        st = self.runner
        n_arr = st.i
        if len(self.M) != n_arr or len(set(self.M.values())) != n_arr:
            errs.append(f"M is not a matching on {n_arr} arrivals")
        opt = st.opt_tracker.scaled_cost
        if self.frozen_cost > opt:
            errs.append(f"c(M_f) exceeds OPT_{n_arr}")
        t = self.t
        if self.inactive_cost * t.denominator > (t.numerator + 2 * t.denominator) * opt:
            errs.append(f"inactive cost exceeds (t+2) OPT_{n_arr}")
        if errs:
            raise InvariantViolation("; ".join(errs))
        return errs

    def recount(self) -> tuple[int, int]:
        """(c(M^f), inactive cost) recomputed from scratch, scaled."""
        fc = sum(self._edge_cost(r, s) for r, s in self.m_f.items())
        ic = sum(self._edge_cost(r, self.M[r]) for r in self.M if self._counts_inactive(r))
        return fc, ic

    def cost(self) -> Fraction:
        return Fraction(sum(self._edge_cost(r, s) for r, s in self.M.items()), self.inst.scale)

    def freeze_persistence_violations(self) -> list[tuple[int, int, int]]:
        return [(r, a, b) for r, a, b in self.freeze_pairs if b < a * a]

    def write_events(self, fh: IO[str]) -> None:
        for ev in self.events:
            fh.write(json.dumps(ev.to_json_obj()))
            fh.write("\n")


def current_matching(state: RecourseState) -> Matching:
    """The output matching M, after validity and status checks."""
    M = Matching(state.M)
    for r in state.M:
        if state.status(r) not in (ACTIVE, FROZEN, DETOUR):
            raise InvariantViolation(f"request r{r} has no status")
    if state.M_inv != {s: r for r, s in state.M.items()}:
        raise InvariantViolation("server index out of sync with M")
    return M


def update_freezing(state: RecourseState, i: int) -> list[Event]:
    """Freezing pass for arrival ``i`` (1-based) against the current OPT_i."""
    start = len(state.events)
    state.update_freezing(state.runner.opt_tracker.scaled_cost, i)
    return state.events[start:]


def run_recourse(inst: Instance, t=3, **kw) -> RecourseState:
    state = RecourseState(inst, t, **kw)
    for r in range(inst.n):
        state.arrive(r)
    return state
