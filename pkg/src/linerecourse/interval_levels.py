"""Union of search intervals, level intervals and the new-top-block test.

All intervals are open.  Two intervals that only share an endpoint stay
separate components.
"""

from __future__ import annotations

from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence, Union

from linerecourse.line_model import parse_rat

Interval = tuple[Fraction, Fraction]


class _Trivial:
    __slots__ = ()

    def __repr__(self) -> str:
        return "TRIVIAL"

    def __reduce__(self):
        return "TRIVIAL"


TRIVIAL = _Trivial()
Level = Union[int, _Trivial]


class LaminarityError(AssertionError):
    pass


class Coverage:
    """Sorted pairwise-disjoint open intervals."""

    __slots__ = ("lefts", "rights")

    def __init__(self, intervals: Iterable[Interval] = ()):
        self.lefts: list[Fraction] = []
        self.rights: list[Fraction] = []
        for iv in intervals:
            self.insert(iv)

    @property
    def intervals(self) -> list[Interval]:
        return list(zip(self.lefts, self.rights))

    def __len__(self) -> int:
        return len(self.lefts)

    def __eq__(self, other) -> bool:
        if isinstance(other, Coverage):
            return self.lefts == other.lefts and self.rights == other.rights
        return NotImplemented

    def __repr__(self) -> str:
        return f"Coverage({[(str(a), str(b)) for a, b in self.intervals]})"

    def copy(self) -> "Coverage":
        c = Coverage()
        c.lefts = list(self.lefts)
        c.rights = list(self.rights)
        return c

    def insert(self, si: Optional[Interval]) -> None:
        if si is None:
            return
        lo, hi = si
        if not lo < hi:
            return
        # components strictly overlapping (lo, hi): left < hi and right > lo
        i = bisect_right(self.rights, lo)
        j = bisect_left(self.lefts, hi)
        if i < j:
            lo = min(lo, self.lefts[i])
            hi = max(hi, self.rights[j - 1])
        self.lefts[i:j] = [lo]
        self.rights[i:j] = [hi]

    def component(self, pos: Fraction) -> Optional[Interval]:
        i = bisect_right(self.lefts, pos) - 1
        if i >= 0 and pos < self.rights[i] and self.lefts[i] < pos:
            return self.lefts[i], self.rights[i]
        return None


def coverage_insert(cov: Coverage, si: Optional[Interval]) -> Coverage:
    """Union of ``cov`` and ``si``; ``cov`` itself is left untouched."""
    out = cov.copy()
    out.insert(si)
    return out


def component_containing(cov: Coverage, pos) -> Optional[Interval]:
    return cov.component(parse_rat(pos))


class _Powers:
    """Cached exact powers (1+eps)^k for k >= 0 and k < 0."""

    def __init__(self, eps: Fraction):
        self.base = 1 + eps
        self.up = [Fraction(1)]    # base^0, base^1, ...
        self.down = [Fraction(1)]  # base^0, base^-1, ...

    def level(self, length: Fraction) -> int:
        if length >= 1:
            up = self.up
            while up[-1] <= length:
                up.append(up[-1] * self.base)
            # smallest k with length < base^k
            return bisect_right(up, length)
        down = self.down
        while down[-1] > length:
            down.append(down[-1] / self.base)
        # down is decreasing; find the first j with base^-j <= length, then k = -j + 1
        lo, hi = 0, len(down) - 1
        while lo < hi:
            mid = (lo + hi) // 2
            if down[mid] <= length:
                hi = mid
            else:
                lo = mid + 1
        return 1 - lo

    def power(self, k: int) -> Fraction:
        if k >= 0:
            while len(self.up) <= k:
                self.up.append(self.up[-1] * self.base)
            return self.up[k]
        while len(self.down) <= -k:
            self.down.append(self.down[-1] / self.base)
        return self.down[-k]


_POWER_CACHE: dict[Fraction, _Powers] = {}


def _powers(eps: Fraction) -> _Powers:
    p = _POWER_CACHE.get(eps)
    if p is None:
        p = _POWER_CACHE[eps] = _Powers(eps)
    return p


def level_of(length, eps) -> Level:
    """The integer k with ``(1+eps)^(k-1) <= length < (1+eps)^k``; TRIVIAL for 0."""
    length = parse_rat(length)
    eps = parse_rat(eps)
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    if length < 0:
        raise ValueError(f"negative length {length}")
    if length == 0:
        return TRIVIAL
    return _powers(eps).level(length)


def check_level(length, eps, k: int) -> bool:
    """Exact verification of the level inequality."""
    p = _powers(parse_rat(eps))
    length = parse_rat(length)
    return p.power(k - 1) <= length < p.power(k)


@dataclass(frozen=True)
class LevelInterval:
    owner: int
    interval: Optional[Interval]
    level: Level

    @property
    def trivial(self) -> bool:
        return self.level is TRIVIAL


def make_level_interval(owner: int, cov: Coverage, pos: Fraction, eps: Fraction) -> LevelInterval:
    """I_i is the component of ``cov`` that contains the request position."""
    iv = cov.component(pos)
    if iv is None:
        return LevelInterval(owner, None, TRIVIAL)
    return LevelInterval(owner, iv, level_of(iv[1] - iv[0], eps))


def _contains(outer: Interval, inner: Interval) -> bool:
    return outer[0] <= inner[0] and inner[1] <= outer[1]


def _disjoint(a: Interval, b: Interval) -> bool:
    return a[1] <= b[0] or b[1] <= a[0]


def assert_laminar_pair(a: Optional[Interval], b: Optional[Interval]) -> None:
    if a is None or b is None:
        return
    if not (_disjoint(a, b) or _contains(a, b) or _contains(b, a)):
        raise LaminarityError(f"intervals {a} and {b} cross")


def is_new_top_block(history: Sequence[LevelInterval], cand: LevelInterval) -> bool:
    """True iff no earlier interval of the same level lies inside ``cand``."""
    if cand.trivial or cand.interval is None:
        return False
    for h in history:
        if h.interval is None:
            continue
        assert_laminar_pair(h.interval, cand.interval)
        if h.level == cand.level and _contains(cand.interval, h.interval):
            return False
    return True


class LevelIndex:
    """Per-level sorted intervals for a fast new-top-block test."""

    def __init__(self):
        self._by_level: dict[int, tuple[list[Fraction], list[Fraction]]] = {}
        self.history: list[LevelInterval] = []

    def add(self, li: LevelInterval) -> None:
        self.history.append(li)
        if li.trivial or li.interval is None:
            return
        lefts, rights = self._by_level.setdefault(li.level, ([], []))
        lo, hi = li.interval
        k = bisect_right(lefts, lo)
        lefts.insert(k, lo)
        rights.insert(k, hi)

    def is_new_top_block(self, cand: LevelInterval) -> bool:
        if cand.trivial or cand.interval is None:
            return False
        entry = self._by_level.get(cand.level)
        if entry is None:
            return True
        lefts, rights = entry
        lo, hi = cand.interval
        k = bisect_left(lefts, lo)
        while k < len(lefts) and lefts[k] < hi:
            if rights[k] <= hi:
                return False
            k += 1
        return True


def check_laminar(intervals: Iterable[Optional[Interval]]) -> None:
    """Raise :class:`LaminarityError` unless the family is laminar."""
    ivs = sorted({iv for iv in intervals if iv is not None}, key=lambda iv: (iv[0], -iv[1]))
    stack: list[Interval] = []
    for iv in ivs:
        while stack and stack[-1][1] <= iv[0]:
            stack.pop()
        if stack and iv[1] > stack[-1][1]:
            raise LaminarityError(f"intervals {stack[-1]} and {iv} cross")
        stack.append(iv)
