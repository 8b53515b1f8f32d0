"""t-net-cost of alternating paths and minimum t-net-cost augmenting paths.

Two search engines answer the same query:

``reference``
    label-correcting (queue based Bellman-Ford) on true residual costs,
    unmatched request->server arcs at ``t * dist`` and matched
    server->request arcs at ``-dist``; raises on a negative cycle.
``potentials``
    Dijkstra on reduced costs with Hungarian-style potentials carried from
    one arrival to the next (:class:`TNetEngine`).

Ties among cheapest paths go to fewer edges, then to the leftmost endpoint
server, then to the lexicographically smallest vertex sequence.  Both
engines apply the rule independently, so their paths can be compared.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Optional

import numpy as np

from linerecourse import kernels
from linerecourse.kernels import NegativeCycleError, hop_base
from linerecourse.line_model import AltPath, Instance, InstanceError, Matching, dist, parse_rat

OpenInterval = Optional[tuple[Fraction, Fraction]]


class NoFreeServerError(RuntimeError):
    pass


@dataclass(frozen=True)
class TParam:
    t: Fraction

    def __post_init__(self):
        t = parse_rat(self.t)
        if t <= 1:
            raise ValueError(f"t must exceed 1, got {t}")
        object.__setattr__(self, "t", t)


def as_t(t, allow_one: bool = False) -> Fraction:
    if isinstance(t, TParam):
        return t.t
    t = parse_rat(t)
    if t < 1 or (t == 1 and not allow_one):
        raise ValueError(f"t must exceed 1, got {t}")
    return t


def t_net_cost(P: AltPath, M: Mapping[int, int], t, inst: Instance) -> Fraction:
    """``t * c(P minus M) - c(P within M)``."""
    t = as_t(t, allow_one=True)
    P.check_alternating(M)
    new, old = P.cost_split(inst, M)
    return t * new - old


def co_net_cost(P: AltPath, M: Mapping[int, int], t, inst: Instance) -> Fraction:
    """``t * c(P within M) - c(P minus M)``; adds up with φ to ``(t-1) c(P)``."""
    t = as_t(t, allow_one=True)
    P.check_alternating(M)
    new, old = P.cost_split(inst, M)
    return t * old - new


class PathSearch:
    """Result of one minimum t-net-cost augmenting-path query.

    ``labels`` maps ``("r", i)`` / ``("s", j)`` to the cheapest t-net-cost of
    an alternating walk from the query request.  The reference engine labels
    every reachable vertex, the potentials engine the explored region, which
    always includes every request cheaper than ``phi``.
    """

    __slots__ = ("inst", "t", "path", "phi", "endpoint", "engine",
                 "_den", "_phi_int", "_lab_s", "_lab_r", "_labels", "_si")

    def __init__(self, inst, t, path, phi_int, den, lab_s, lab_r, engine):
        self.inst = inst
        self.t = t
        self.path = AltPath(tuple(path))
        self.endpoint = self.path.endpoint
        self._den = den
        self._phi_int = phi_int
        self.phi = Fraction(phi_int, den)
        self._lab_s = lab_s
        self._lab_r = lab_r
        self.engine = engine
        self._labels = None
        self._si = False
        if phi_int < 0:
            raise NegativeCycleError(f"negative t-net-cost {self.phi} for an augmenting path")

    @property
    def labels(self) -> dict[tuple[str, int], Fraction]:
        if self._labels is None:
            den = self._den
            lab = {("s", s): Fraction(d, den) for s, d in self._lab_s}
            lab.update((("r", r), Fraction(d, den)) for r, d in self._lab_r)
            self._labels = lab
        return self._labels

    @property
    def request(self) -> int:
        return self.path.start

    @property
    def si(self) -> OpenInterval:
        """Search interval, computed in scaled integers."""
        if self._si is False:
            self._si = _si_scaled(self)
        return self._si

    def __repr__(self) -> str:
        return f"PathSearch(phi={self.phi}, path={self.path.vertices}, engine={self.engine!r})"


def _si_scaled(ps: PathSearch) -> OpenInterval:
    phi = ps._phi_int
    if phi == 0:
        return None
    a = ps.t.numerator
    _, rpos = ps.inst.scaled
    lo = hi = None
    for r, d in ps._lab_r:
        if d < phi:
            reach = phi - d
            x = a * rpos[r]
            if lo is None or x - reach < lo:
                lo = x - reach
            if hi is None or x + reach > hi:
                hi = x + reach
    den = a * ps.inst.scale
    return Fraction(lo, den), Fraction(hi, den)


def search_interval(ps: PathSearch, r_pos: Fraction, t) -> OpenInterval:
    """Convex hull of points reachable from the request for less than φ.

    A point ``x`` counts as a virtual free server reached through a labelled
    request ``r'`` at cost ``D(r') + t * |r' - x|``.  Returns an open interval
    ``(lo, hi)`` or None when it is empty (φ = 0).
    """
    t = as_t(t, allow_one=True)
    phi = ps.phi
    if phi == 0:
        return None
    R = ps.inst.requests
    lo = hi = None
    for (kind, idx), d in ps.labels.items():
        if kind != "r" or d >= phi:
            continue
        reach = (phi - d) / t
        lo = R[idx] - reach if lo is None else min(lo, R[idx] - reach)
        hi = R[idx] + reach if hi is None else max(hi, R[idx] + reach)
    if lo is None or not lo < r_pos < hi:
        raise AssertionError(f"search interval ({lo}, {hi}) misses the request at {r_pos}")
    return lo, hi


def _arrays_from_matching(M: Mapping[int, int], inst: Instance):
    s_match = [-1] * inst.m
    r_match = [-1] * inst.n
    for r, s in M.items():
        if not (0 <= r < inst.n and 0 <= s < inst.m):
            raise InstanceError(f"dangling edge ({r}, {s})")
        if s_match[s] >= 0:
            raise InstanceError(f"server {s} matched twice")
        s_match[s] = r
        r_match[r] = s
    return s_match, r_match


def _johnson_potentials(spos, rpos, s_match, r_match, a, b):
    """Bellman-Ford from a virtual source: potentials with nonnegative reduced costs."""
    m, n = len(spos), len(rpos)
    h_s = [0] * m
    h_r = [0] * n
    matched = [r for r in range(n) if r_match[r] >= 0]
    for _ in range(len(matched) + m + 2):
        changed = False
        for u in matched:
            base = h_r[u]
            for s in range(m):
                if s == r_match[u]:
                    continue
                v = base + a * abs(spos[s] - rpos[u])
                if v < h_s[s]:
                    h_s[s] = v
                    changed = True
        for u in matched:
            s = r_match[u]
            v = h_s[s] - b * abs(spos[s] - rpos[u])
            if v < h_r[u]:
                h_r[u] = v
                changed = True
        if not changed:
            return h_s, h_r
    raise NegativeCycleError("matching is not t-feasible: negative residual cycle")


def min_aug_path(M: Mapping[int, int], r: int, inst: Instance, t, engine: str = "potentials",
                 compiled: Optional[bool] = None) -> PathSearch:
    """Minimum t-net-cost augmenting path from request ``r`` w.r.t. ``M``.

    The potentials engine starts from Johnson potentials of ``M`` here;
    :class:`TNetEngine` keeps them across arrivals instead.
    """
    t = as_t(t, allow_one=True)
    if r in M:
        raise InstanceError(f"request r{r} is already matched")
    a, b = t.numerator, t.denominator
    spos, rpos = inst.scaled
    s_match, r_match = _arrays_from_matching(M, inst)
    alive = [1] * inst.m
    force_py = compiled is False
    den = b * inst.scale
    if engine == "reference":
        out = kernels.spfa_search(spos, rpos, s_match, r_match, alive, r, a, b, force_python=force_py)
        if out is None:
            raise NoFreeServerError("no free server")
        return _from_spfa(out, inst, t, den)
    if engine != "potentials":
        raise ValueError(f"unknown engine {engine!r}")
    h_s, h_r = _johnson_potentials(spos, rpos, s_match, r_match, a, b)
    pot_max = max([abs(x) for x in h_s + h_r] + [0])
    span = max(spos + rpos) - min(spos + rpos)
    if not force_py and kernels.HAVE_COMPILED and kernels.dijkstra_fits(inst.n, inst.m, span, a, b, pot_max):
        args = [np.asarray(x, dtype=np.int64) for x in (spos, rpos, h_s, h_r, s_match, r_match)]
        out = kernels.dijkstra_search(args[0], args[1], args[2], args[3], args[4], args[5],
                                      np.ones(inst.m, dtype=np.uint8), r, a, b, True)
    else:
        out = kernels.dijkstra_search(list(spos), list(rpos), h_s, h_r, s_match, r_match, alive,
                                      r, a, b, True, force_python=True)
    if out is None:
        raise NoFreeServerError("no free server")
    phi, path, exp_s, lab_s, exp_r, lab_r = out
    return PathSearch(inst, t, path, int(phi), den,
                      list(zip(exp_s, map(int, lab_s))), list(zip(exp_r, map(int, lab_r))),
                      "potentials")


def _from_spfa(out, inst, t, den) -> PathSearch:
    best, path, reached_s, key_s, reached_r, key_r = out
    H = hop_base(inst.n, inst.m)
    lab_s = [(s, int(k) // H) for s, k in zip(reached_s, key_s)]
    lab_r = [(r, int(k) // H) for r, k in zip(reached_r, key_r)]
    return PathSearch(inst, t, path, int(best) // H, den, lab_s, lab_r, "reference")


class TNetEngine:
    """Incremental search state: offline matching plus dual potentials.

    ``search`` finds the minimum t-net-cost augmenting path for a new
    request (and updates the potentials); ``augment`` applies it.  Servers
    can be retired with ``retire`` (pinned pairs on alternating instances).
    """

    def __init__(self, inst: Instance, t, compiled: Optional[bool] = None, allow_one: bool = False):
        self.inst = inst
        self.t = as_t(t, allow_one=allow_one)
        self.a, self.b = self.t.numerator, self.t.denominator
        self.den = self.b * inst.scale
        spos, rpos = inst.scaled
        self.spos_list = list(spos)
        self.rpos_list = list(rpos)
        self.span = (max(spos + rpos) - min(spos + rpos)) if inst.n else 0
        self.use_c = kernels.HAVE_COMPILED and compiled is not False
        if self.use_c and not kernels.dijkstra_fits(inst.n, inst.m, self.span, self.a, self.b, 0):
            self.use_c = False
        n, m = inst.n, inst.m
        if self.use_c:
            self.spos = np.asarray(spos, dtype=np.int64)
            self.rpos = np.asarray(rpos, dtype=np.int64)
            self.pi_s = np.zeros(m, dtype=np.int64)
            self.pi_r = np.zeros(n, dtype=np.int64)
            self.s_match = np.full(m, -1, dtype=np.int64)
            self.r_match = np.full(n, -1, dtype=np.int64)
            self.s_alive = np.ones(m, dtype=np.uint8)
        else:
            self._to_python(zero=True)
        self.m_off: dict[int, int] = {}
        self.fallbacks = 0

    def _to_python(self, zero=False):
        n, m = self.inst.n, self.inst.m
        self.spos = self.spos_list
        self.rpos = self.rpos_list
        if zero:
            self.pi_s = [0] * m
            self.pi_r = [0] * n
            self.s_match = [-1] * m
            self.r_match = [-1] * n
            self.s_alive = [1] * m
        else:
            self.pi_s = [int(x) for x in self.pi_s]
            self.pi_r = [int(x) for x in self.pi_r]
            self.s_match = [int(x) for x in self.s_match]
            self.r_match = [int(x) for x in self.r_match]
            self.s_alive = [int(x) for x in self.s_alive]
        self.use_c = False

    def free_servers(self) -> int:
        return sum(1 for s in range(self.inst.m) if self.s_alive[s] and self.s_match[s] < 0)

    def search(self, r: int, want_si: bool = True) -> PathSearch:
        if self.r_match[r] >= 0:
            raise InstanceError(f"request r{r} is already matched")
        if self.use_c:
            pot = max(int(np.abs(self.pi_s).max(initial=0)), int(np.abs(self.pi_r).max(initial=0)))
            if not kernels.dijkstra_fits(self.inst.n, self.inst.m, self.span, self.a, self.b, pot):
                self._to_python()
                self.fallbacks += 1
        out = kernels.dijkstra_search(self.spos, self.rpos, self.pi_s, self.pi_r, self.s_match,
                                      self.r_match, self.s_alive, r, self.a, self.b, want_si,
                                      force_python=not self.use_c)
        if out is None:
            raise NoFreeServerError(f"no free server for request r{r}")
        phi, path, exp_s, lab_s, exp_r, lab_r = out
        return PathSearch(self.inst, self.t, path, int(phi), self.den,
                          list(zip(exp_s, map(int, lab_s))), list(zip(exp_r, map(int, lab_r))),
                          "potentials")

    def reference_search(self, r: int) -> PathSearch:
        out = kernels.spfa_search(self.spos_list, self.rpos_list, self.s_match, self.r_match,
                                  self.s_alive, r, self.a, self.b)
        if out is None:
            raise NoFreeServerError(f"no free server for request r{r}")
        return _from_spfa(out, self.inst, self.t, self.den)

    def augment(self, path) -> None:
        v = path.vertices if isinstance(path, AltPath) else path
        s_match, r_match, m_off = self.s_match, self.r_match, self.m_off
        for k in range(0, len(v), 2):
            r, s = v[k], v[k + 1]
            s_match[s] = r
            r_match[r] = s
            m_off[r] = s

    def retire(self, r: int, s: int) -> None:
        """Remove the pair (r, s) from the residual universe for good."""
        if self.m_off.get(r) != s:
            raise InstanceError(f"can only retire a matched pair, got (r{r}, s{s})")
        del self.m_off[r]
        self.s_alive[s] = 0
        self.s_match[s] = -1
        self.r_match[r] = -1

    def matching(self) -> Matching:
        return Matching(self.m_off)

    def scaled_cost(self) -> int:
        sp, rp = self.spos_list, self.rpos_list
        return sum(abs(rp[r] - sp[s]) for r, s in self.m_off.items())
