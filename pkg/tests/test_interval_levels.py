from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from linerecourse.interval_levels import (
    TRIVIAL,
    Coverage,
    LaminarityError,
    LevelIndex,
    LevelInterval,
    check_laminar,
    check_level,
    component_containing,
    coverage_insert,
    is_new_top_block,
    level_of,
)

EPS = Fraction(1, 96)
F = Fraction


def test_coverage_insert_examples():
    c = coverage_insert(Coverage(), (0, 6))
    assert c.intervals == [(0, 6)]
    assert coverage_insert(c, (-6, 10)).intervals == [(-6, 10)]
    assert coverage_insert(c, (6, 8)).intervals == [(0, 6), (6, 8)]
    # the original coverage is untouched
    assert c.intervals == [(0, 6)]


def test_coverage_ignores_empty():
    c = Coverage([(1, 2)])
    assert coverage_insert(c, None) == c
    assert coverage_insert(c, (3, 3)) == c


def test_component_examples():
    assert component_containing(Coverage([(-6, 10)]), 1) == (-6, 10)
    assert component_containing(Coverage([(0, 6)]), 6) is None
    assert component_containing(Coverage(), 0) is None


def test_level_examples():
    assert level_of(1, EPS) == 1
    assert level_of(1, F(1, 2)) == 1
    assert level_of(6, EPS) == 173
    assert level_of(16, EPS) == 268
    assert level_of(0, EPS) is TRIVIAL
    assert check_level(6, EPS, 173) and not check_level(6, EPS, 174)


@given(st.fractions(min_value=F(1, 10**4), max_value=10**4),
       st.sampled_from([EPS, F(1, 2), F(1, 7), F(3)]))
def test_level_inequality_exact(length, eps):
    k = level_of(length, eps)
    assert (1 + eps) ** (k - 1) <= length < (1 + eps) ** k


def test_new_top_block_examples():
    assert is_new_top_block([], LevelInterval(0, (0, 6), 173))
    h = [LevelInterval(0, (0, 6), 173)]
    assert not is_new_top_block(h, LevelInterval(1, (-1, 7), 173))
    assert is_new_top_block(h, LevelInterval(1, (-6, 10), 268))
    assert not is_new_top_block(h, LevelInterval(1, None, TRIVIAL))
    with pytest.raises(LaminarityError):
        is_new_top_block(h, LevelInterval(1, (3, 9), 173))


intervals = st.tuples(st.integers(-30, 30), st.integers(1, 20)).map(lambda p: (F(p[0]), F(p[0] + p[1])))


@given(st.lists(intervals, max_size=12), st.lists(st.integers(-30, 50), max_size=5))
def test_coverage_union_matches_pointwise(ivs, probes):
    cov = Coverage()
    for iv in ivs:
        cov = coverage_insert(cov, iv)
    comps = cov.intervals
    assert all(a[1] <= b[0] for a, b in zip(comps, comps[1:]))
    for x in [F(p, 2) for p in probes]:
        inside = any(lo < x < hi for lo, hi in ivs)
        assert (component_containing(cov, x) is not None) == inside


@st.composite
def laminar_family(draw):
    """Random laminar family built by nested splitting of (0, 64)."""
    out = []

    def split(lo, hi, depth):
        out.append((F(lo), F(hi)))
        if depth == 0 or hi - lo < 2:
            return
        cut = draw(st.integers(lo, hi))
        if lo < cut and draw(st.booleans()):
            split(lo, cut, depth - 1)
        if cut < hi and draw(st.booleans()):
            split(cut, hi, depth - 1)

    split(0, 64, 5)
    return draw(st.permutations(out))


@given(laminar_family(), st.sampled_from([F(1, 2), F(1, 8)]))
def test_level_index_matches_linear_scan(fam, eps):
    check_laminar(fam)
    idx = LevelIndex()
    for k, iv in enumerate(fam):
        li = LevelInterval(k, iv, level_of(iv[1] - iv[0], eps))
        assert idx.is_new_top_block(li) == is_new_top_block(idx.history, li)
        idx.add(li)


def test_check_laminar_detects_crossing():
    check_laminar([(0, 4), (1, 2), (4, 6), None])
    with pytest.raises(LaminarityError):
        check_laminar([(0, 4), (2, 6)])


@given(st.lists(intervals, min_size=2, max_size=6))
def test_nesting_implies_level_order(ivs):
    for a in ivs:
        for b in ivs:
            if b[0] <= a[0] and a[1] <= b[1]:
                assert level_of(a[1] - a[0], EPS) <= level_of(b[1] - b[0], EPS)
