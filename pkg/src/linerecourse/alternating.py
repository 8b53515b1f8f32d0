"""Alternating instances: freeze-after-k matching, path forest and checkers.

On an alternating instance the sorted points read server, request, server,
..., request, server.  The algorithm augments the offline matching along
minimum t-net-cost paths with ``t = 1 + eps/2``; a request whose output
server has changed ``k`` times is pinned to its server, and the pinned pair
leaves the residual instance, which stays alternating.
"""

from __future__ import annotations

import json
from bisect import bisect_left
from dataclasses import dataclass, field
from fractions import Fraction
from typing import IO, Optional, Sequence

from linerecourse.line_model import Instance, InstanceError, Matching, format_rat, parse_rat
from linerecourse.opt_oracle import opt_dp
from linerecourse.tnet_runner import InvariantViolation
from linerecourse.tnet_search import TNetEngine

LEFT = "L"
RIGHT = "R"


class AlternationError(InstanceError):
    pass


def _sorted_points(inst: Instance):
    pts = [(x, 0, j) for j, x in enumerate(inst.servers)]
    pts += [(x, 1, i) for i, x in enumerate(inst.requests)]
    pts.sort()
    return pts


def validate_alternating(inst: Instance) -> None:
    """Raise :class:`AlternationError` at the first position breaking alternation."""
    pts = _sorted_points(inst)
    if not pts:
        raise AlternationError("empty instance")
    for k in range(1, len(pts)):
        if pts[k - 1][0] == pts[k][0]:
            raise AlternationError(f"position {k}: duplicate coordinate {pts[k][0]}")
    for k, (x, kind, idx) in enumerate(pts):
        want = k % 2
        if kind != want:
            name = "server" if want == 0 else "request"
            raise AlternationError(f"position {k}: expected a {name} at {x}")
    if pts[-1][1] != 0:
        raise AlternationError(f"position {len(pts) - 1}: outermost point must be a server")


def is_alternating(inst: Instance) -> bool:
    try:
        validate_alternating(inst)
    except AlternationError:
        return False
    return True


def _k_holds(eps: Fraction, k: int, power: Fraction) -> bool:
    return Fraction(2) / (4 + eps) * power - eps / 2 >= 2 * k + 2


def min_k(eps) -> int:
    """Smallest k >= 1 with (2/(4+eps)) (1+eps/(2+eps))^k - eps/2 >= 2k + 2."""
    eps = parse_rat(eps)
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    base = 1 + eps / (2 + eps)
    k, power = 1, base
    while not _k_holds(eps, k, power):
        k += 1
        power *= base
    return k


def k_condition(eps, k: int) -> bool:
    """Exact evaluation of the inequality behind :func:`min_k`."""
    eps = parse_rat(eps)
    return _k_holds(eps, k, (1 + eps / (2 + eps)) ** k)


def delta(inst: Instance) -> Fraction:
    """Largest over smallest request-to-server distance."""
    S = sorted(inst.servers)
    R = inst.requests
    if not S or not R:
        raise InstanceError("delta needs servers and requests")
    lo = None
    for x in R:
        j = bisect_left(S, x)
        for jj in (j - 1, j):
            if 0 <= jj < len(S):
                d = abs(S[jj] - x)
                if lo is None or d < lo:
                    lo = d
    if lo == 0:
        raise InstanceError("delta infinite: a request coincides with a server")
    hi = max(abs(max(R) - S[0]), abs(S[-1] - min(R)))
    return hi / lo


# path forest ---------------------------------------------------------------


@dataclass
class PathForestNode:
    owner: int
    segment: tuple[Fraction, Fraction]
    side: str
    parent: Optional[int] = None      # owner of the parent node
    children: list[int] = field(default_factory=list)


class PathForest:
    """Laminar containment forest of path segments, keyed by owner."""

    def __init__(self):
        self.nodes: dict[int, PathForestNode] = {}
        self.roots: list[int] = []

    def __len__(self) -> int:
        return len(self.nodes)

    def depth(self, owner: int) -> int:
        d = 0
        p = self.nodes[owner].parent
        while p is not None:
            d += 1
            p = self.nodes[p].parent
        return d

    def depths(self) -> dict[int, int]:
        out = {}
        stack = [(r, 0) for r in self.roots]
        while stack:
            o, d = stack.pop()
            out[o] = d
            stack.extend((c, d + 1) for c in self.nodes[o].children)
        return out

    def grandchildren(self, owner: int) -> list[int]:
        return [g for c in self.nodes[owner].children for g in self.nodes[c].children]

    def to_json_obj(self) -> list[dict]:
        d = self.depths()
        return [{"owner": o, "segment": [format_rat(n.segment[0]), format_rat(n.segment[1])],
                 "side": n.side, "parent": n.parent, "depth": d[o]}
                for o, n in sorted(self.nodes.items())]

    def dump(self, fh: IO[str]) -> None:
        json.dump(self.to_json_obj(), fh)


def _inside(inner, outer) -> bool:
    return outer[0] <= inner[0] and inner[1] <= outer[1] and inner != outer


def _cross(a, b) -> bool:
    disjoint = a[1] <= b[0] or b[1] <= a[0]
    return not (disjoint or _inside(a, b) or _inside(b, a) or a == b)


def forest_insert(forest: PathForest, node: PathForestNode) -> PathForest:
    """Insert under its minimal proper container and adopt the nodes it contains."""
    seg = node.segment
    if node.owner in forest.nodes:
        raise ValueError(f"owner {node.owner} already in the forest")
    parent = None
    level = forest.roots
    while True:
        nxt = None
        for o in level:
            other = forest.nodes[o].segment
            if _cross(seg, other):
                raise AssertionError(f"segments {seg} and {other} overlap without nesting")
            if _inside(seg, other):
                nxt = o
                break
        if nxt is None:
            break
        parent = nxt
        level = forest.nodes[nxt].children
    adopted = [o for o in level if _inside(forest.nodes[o].segment, seg)]
    for o in adopted:
        level.remove(o)
        forest.nodes[o].parent = node.owner
    node.children = adopted
    node.parent = parent
    level.append(node.owner)
    forest.nodes[node.owner] = node
    return forest


# the algorithm ---------------------------------------------------------------


@dataclass
class AltRecord:
    i: int
    path: tuple[int, ...]
    phi: Fraction
    side: str
    segment: tuple[Fraction, Fraction]
    pinned: list[tuple[int, int]] = field(default_factory=list)
    changed: list[tuple[int, int, int]] = field(default_factory=list)  # (request, from, to)

    def to_json_obj(self) -> dict:
        return {"i": self.i, "path": list(self.path), "phi": format_rat(self.phi),
                "side": self.side,
                "segment": [format_rat(self.segment[0]), format_rat(self.segment[1])],
                "pinned": [list(p) for p in self.pinned],
                "changed": [list(c) for c in self.changed]}


class AltState:
    def __init__(self, inst: Instance, eps=1, k: Optional[int] = None,
                 compiled: Optional[bool] = None, check: bool = True):
        validate_alternating(inst)
        self.inst = inst
        self.eps = parse_rat(eps)
        self.t = 1 + self.eps / 2
        self.k = min_k(self.eps) if k is None else int(k)
        if self.k < 1:
            raise ValueError("k must be at least 1")
        self.engine = TNetEngine(inst, self.t, compiled=compiled)
        self.M: dict[int, int] = {}
        self.pinned: dict[int, int] = {}
        self.reassign: list[int] = [0] * inst.n
        self.records: list[AltRecord] = []
        self.forest = PathForest()
        self.check = check
        # residual order as a doubly linked list over point ids (servers j, requests m + i)
        pts = _sorted_points(inst)
        m = inst.m
        ids = [idx if kind == 0 else m + idx for _, kind, idx in pts]
        self._prev = {v: (ids[k - 1] if k > 0 else None) for k, v in enumerate(ids)}
        self._next = {v: (ids[k + 1] if k + 1 < len(ids) else None) for k, v in enumerate(ids)}

    @property
    def m_off(self) -> dict[int, int]:
        return self.engine.m_off

    def _pin(self, r: int, s: int) -> None:
        m = self.inst.m
        rid, sid = m + r, s
        if self._next.get(rid) == sid:
            left, right = self._prev[rid], self._next[sid]
        elif self._prev.get(rid) == sid:
            left, right = self._prev[sid], self._next[rid]
        else:
            raise AlternationError(f"pinned pair (r{r}, s{s}) is not adjacent; residual no longer alternating")
        if left is not None:
            self._next[left] = right
        if right is not None:
            self._prev[right] = left
        for v in (rid, sid):
            del self._prev[v]
            del self._next[v]
        self.engine.retire(r, s)
        self.pinned[r] = s

    def arrive(self, r: int) -> AltRecord:
        if r != len(self.records):
            raise InstanceError(f"expected arrival r{len(self.records)}, got r{r}")
        ps = self.engine.search(r, want_si=False)
        if ps.phi < 0:
            raise InvariantViolation(f"negative phi at arrival {r}")
        v = ps.path.vertices
        self.engine.augment(ps.path)
        changed = []
        for q in v[2::2]:
            old = self.M[q]
            new = self.m_off[q]
            if old != new:
                self.M[q] = new
                self.reassign[q] += 1
                changed.append((q, old, new))
        self.M[r] = self.m_off[r]
        R, S = self.inst.requests, self.inst.servers
        side = LEFT if S[ps.endpoint] < R[r] else RIGHT
        seg = ps.path.segment(self.inst)
        pinned = []
        for q, _, _ in changed:
            if self.reassign[q] >= self.k and q not in self.pinned:
                self._pin(q, self.M[q])
                pinned.append((q, self.M[q]))
        rec = AltRecord(r, v, ps.phi, side, seg, pinned, changed)
        self.records.append(rec)
        forest_insert(self.forest, PathForestNode(r, seg, side))
        if self.check:
            self._check_minimal()
        return rec

    def _check_minimal(self) -> None:
        m = self.inst.m
        for q, s in self.m_off.items():
            if self._next.get(m + q) != s and self._prev.get(m + q) != s:
                raise InvariantViolation(f"offline edge (r{q}, s{s}) is not minimal")

    def matching(self) -> Matching:
        return Matching(self.M)

    def cost(self) -> Fraction:
        R, S = self.inst.requests, self.inst.servers
        return sum((abs(R[q] - S[s]) for q, s in self.M.items()), Fraction(0))

    def write_trace(self, fh: IO[str]) -> None:
        for rec in self.records:
            fh.write(json.dumps(rec.to_json_obj()))
            fh.write("\n")


def arrive_alt(state: AltState, r: int) -> AltRecord:
    return state.arrive(r)


@dataclass
class AltResult:
    state: AltState
    cost: Fraction
    opt: Fraction

    @property
    def within_bound(self) -> bool:
        return self.cost <= (1 + self.state.eps) * self.opt

    @property
    def max_reassign(self) -> int:
        return max(self.state.reassign, default=0)


def run_alternating(inst: Instance, eps=1, k: Optional[int] = None, **kw) -> AltResult:
    st = AltState(inst, eps, k, **kw)
    for r in range(inst.n):
        st.arrive(r)
    opt = opt_dp(inst.servers, inst.requests).cost
    return AltResult(st, st.cost(), opt)


# checkers ------------------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    part: str
    i: int
    witness: str


def _structural_path(inst, m_off_inv, nxt, prv, r, side):
    """Walk from r towards ``side`` alternating through minimal matched edges."""
    m = inst.m
    step = prv if side == LEFT else nxt
    verts = [r]
    cur = m + r
    while True:
        s = step.get(cur)
        if s is None:
            return None
        verts.append(s)
        q = m_off_inv.get(s)
        if q is None:
            return verts
        if step.get(s) != m + q:
            return None
        verts.append(q)
        cur = m + q


def check_lemma6(records: Sequence[AltRecord], inst: Instance,
                 forest: Optional[PathForest] = None) -> list[Violation]:
    """Replay a trace: (i) minimal edges, (ii) local flip on I_i, (iii) sides alternate."""
    out: list[Violation] = []
    m = inst.m
    pts = _sorted_points(inst)
    ids = [idx if kind == 0 else m + idx for _, kind, idx in pts]
    prv = {v: (ids[k - 1] if k > 0 else None) for k, v in enumerate(ids)}
    nxt = {v: (ids[k + 1] if k + 1 < len(ids) else None) for k, v in enumerate(ids)}
    m_off: dict[int, int] = {}
    m_off_inv: dict[int, int] = {}

    def adjacent(r, s):
        return nxt.get(m + r) == s or prv.get(m + r) == s

    for rec in records:
        v = rec.path
        for k in range(0, len(v), 2):
            if not adjacent(v[k], v[k + 1]):
                out.append(Violation("i", rec.i, f"path edge (r{v[k]}, s{v[k + 1]}) is not minimal"))
        side = rec.side
        expect = _structural_path(inst, m_off_inv, nxt, prv, rec.i, side)
        if expect is not None and tuple(expect) != tuple(v):
            out.append(Violation("i", rec.i, f"path {v} differs from the structural P^{side} {expect}"))
        # interval I_i spans the two structural paths
        pl = _structural_path(inst, m_off_inv, nxt, prv, rec.i, LEFT)
        pr = _structural_path(inst, m_off_inv, nxt, prv, rec.i, RIGHT)
        for k in range(0, len(v), 2):
            q, s = v[k], v[k + 1]
            old = m_off.get(q)
            if old is not None and m_off_inv.get(old) == q:
                del m_off_inv[old]
            m_off[q] = s
            m_off_inv[s] = q
        for q, s in m_off.items():
            if not adjacent(q, s):
                out.append(Violation("i", rec.i, f"offline edge (r{q}, s{s}) is not minimal"))
        if pl is not None and pr is not None:
            for q in pl[2::2] + pr[2::2] + [rec.i]:
                s = m_off.get(q)
                want = prv.get(m + q) if side == LEFT else nxt.get(m + q)
                if s != want:
                    out.append(Violation("ii", rec.i, f"request r{q} not matched to its {side} neighbour"))
        for q, s in rec.pinned:
            left = prv[m + q] if prv.get(m + q) != s else prv[s]
            right = nxt[s] if nxt.get(m + q) == s else nxt[m + q]
            if left is not None:
                nxt[left] = right
            if right is not None:
                prv[right] = left
            for x in (m + q, s):
                prv.pop(x, None)
                nxt.pop(x, None)
            del m_off[q]
            m_off_inv.pop(s, None)
    if forest is None:
        forest = PathForest()
        for rec in records:
            forest_insert(forest, PathForestNode(rec.i, rec.segment, rec.side))
    for o, node in forest.nodes.items():
        if node.parent is not None and forest.nodes[node.parent].side == node.side:
            out.append(Violation("iii", o, f"child r{o} and parent r{node.parent} share side {node.side}"))
    return out


def check_lemma7(forest: PathForest, t) -> list[Violation]:
    """t |P_h| >= (2t - 1) * sum of grandchildren lengths, at every node."""
    t = parse_rat(t)
    out = []
    for o, node in forest.nodes.items():
        gs = forest.grandchildren(o)
        if not gs:
            continue
        total = sum((forest.nodes[g].segment[1] - forest.nodes[g].segment[0] for g in gs), Fraction(0))
        own = node.segment[1] - node.segment[0]
        if t * own < (2 * t - 1) * total:
            out.append(Violation("lemma7", o, f"|P| = {own} < (2 - 1/t) * {total}"))
    return out
