"""Exact offline optimum on the line.

``opt_dp`` is the non-crossing band dynamic program, ``opt_brute`` an
enumeration used as an independent oracle, and :class:`OptTracker` keeps
the prefix optimum current by successive shortest augmenting paths.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from linerecourse import kernels
from linerecourse.line_model import Instance, InstanceError, Matching, common_scale, parse_rat

BRUTE_LIMIT = 9


@dataclass(frozen=True)
class OptResult:
    cost: Fraction
    matching: Matching


def _scaled(values: Sequence[Fraction], L: int) -> list[int]:
    return [int(v * L) for v in values]


def opt_dp(servers: Sequence, requests: Sequence) -> OptResult:
    """Minimum-cost complete matching of ``requests`` into ``servers``.

    Inputs need not be sorted.  The matching maps positions in ``requests``
    to positions in ``servers``.
    """
    S = [parse_rat(x) for x in servers]
    R = [parse_rat(x) for x in requests]
    if len(R) > len(S):
        raise InstanceError(f"too many requests: {len(R)} > {len(S)} servers")
    if not R:
        return OptResult(Fraction(0), Matching())
    s_order = sorted(range(len(S)), key=lambda j: (S[j], j))
    r_order = sorted(range(len(R)), key=lambda i: (R[i], i))
    L = common_scale(S + R)
    Ss = _scaled([S[j] for j in s_order], L)
    Rs = _scaled([R[i] for i in r_order], L)
    cost, choice = kernels.band_dp(Ss, Rs)
    M = Matching({r_order[k]: s_order[choice[k]] for k in range(len(R))})
    return OptResult(Fraction(cost, L), M)


def opt_brute(servers: Sequence, requests: Sequence) -> Fraction:
    """Enumerate every injective assignment (at most nine requests)."""
    S = [parse_rat(x) for x in servers]
    R = [parse_rat(x) for x in requests]
    if len(R) > BRUTE_LIMIT:
        raise InstanceError(f"opt_brute is limited to {BRUTE_LIMIT} requests, got {len(R)}")
    if len(R) > len(S):
        raise InstanceError(f"too many requests: {len(R)} > {len(S)} servers")
    if not R:
        return Fraction(0)
    L = common_scale(S + R)
    Si, Ri = _scaled(S, L), _scaled(R, L)
    cost = [[abs(r - s) for s in Si] for r in Ri]
    n, m = len(Ri), len(Si)
    best = sum(cost[i][i] for i in range(n))  # the identity assignment is a valid start
    used = [False] * m

    # depth-first over every injective assignment; a branch is cut only once
    # its partial cost already matches the best complete one
    def walk(i: int, acc: int) -> None:
        nonlocal best
        if acc >= best:
            return
        if i == n:
            best = acc
            return
        row = cost[i]
        for j in range(m):
            if not used[j]:
                used[j] = True
                walk(i + 1, acc + row[j])
                used[j] = False

    walk(0, 0)
    return Fraction(best, L)


class OptTracker:
    """Prefix optimum OPT_i, updated by one shortest augmenting path per arrival."""

    def __init__(self, inst: Instance, compiled: Optional[bool] = None):
        # local import: tnet_search depends on this module's package only
        from linerecourse.tnet_search import TNetEngine

        self.inst = inst
        self.engine = TNetEngine(inst, 1, compiled=compiled, allow_one=True)
        self.scaled_cost = 0
        self.count = 0

    def arrive(self, r: int) -> Fraction:
        if r != self.count:
            raise InstanceError(f"requests must arrive in order: expected r{self.count}, got r{r}")
        ps = self.engine.search(r, want_si=False)
        self.engine.augment(ps.path)
        self.scaled_cost += ps._phi_int
        self.count += 1
        return self.cost

    @property
    def cost(self) -> Fraction:
        return Fraction(self.scaled_cost, self.inst.scale)

    def matching(self) -> Matching:
        return self.engine.matching()


def opt_prefix(inst: Instance, method: str = "incremental") -> list[Fraction]:
    """[OPT_1, ..., OPT_n], each against all servers.

    ``method="dp"`` recomputes every prefix with :func:`opt_dp` instead.
    """
    if inst.n > inst.m:
        raise InstanceError(f"n > m: {inst.n} > {inst.m}")
    if method == "dp":
        return [opt_dp(inst.servers, inst.requests[:i]).cost for i in range(1, inst.n + 1)]
    if method != "incremental":
        raise ValueError(f"unknown method {method!r}")
    tr = OptTracker(inst)
    return [tr.arrive(i) for i in range(inst.n)]
