from fractions import Fraction

import pytest
from hypothesis import given, settings

from linerecourse.line_model import Instance, InstanceError, matching_cost
from linerecourse.opt_oracle import BRUTE_LIMIT, OptTracker, opt_brute, opt_dp, opt_prefix

from strategies import instances, rational_positions


def test_dp_two_point_example():
    res = opt_dp([0, 10], [1, 3])
    assert res.cost == 8
    assert dict(res.matching) == {0: 0, 1: 1}


def test_dp_trivial_cases():
    assert opt_dp([0, 10], []).cost == 0
    assert opt_dp([4, 7, 9], [9, 4]).cost == 0
    with pytest.raises(InstanceError):
        opt_dp([0], [1, 2])


def test_dp_matching_in_input_order():
    # unsorted inputs: the matching maps positions of the given lists
    res = opt_dp([10, 0], [3, 1])
    assert res.cost == 8
    assert dict(res.matching) == {0: 0, 1: 1}


def test_brute_examples():
    assert opt_brute([0, 10], [1, 3]) == 8
    assert opt_brute([5], [Fraction(1, 3)]) == Fraction(14, 3)
    assert opt_brute([0, 1, 2], [0, 1, 2]) == 0
    with pytest.raises(InstanceError):
        opt_brute(list(range(BRUTE_LIMIT + 1)), list(range(BRUTE_LIMIT + 1)))


def test_prefix_examples():
    inst = Instance((0, 10), (3, 1))
    assert opt_prefix(inst) == [3, 8]
    assert opt_prefix(inst, method="dp") == [3, 8]
    assert opt_prefix(Instance((0, 5, 9), (5, 9, 0))) == [0, 0, 0]
    assert opt_prefix(Instance((0, 10), (4,))) == [4]


def test_tracker_matches_its_cost():
    inst = Instance((0, 2, 5, 11, 12), (6, 1, 11, 3))
    tr = OptTracker(inst)
    for r in range(inst.n):
        tr.arrive(r)
        assert matching_cost(tr.matching(), inst) == tr.cost
        assert tr.cost == opt_dp(inst.servers, inst.requests[: r + 1]).cost


@settings(max_examples=150)
@given(instances(max_n=6, extra=3, coords=rational_positions))
def test_dp_equals_brute(inst):
    res = opt_dp(inst.servers, inst.requests)
    assert res.cost == opt_brute(inst.servers, inst.requests)
    assert matching_cost(res.matching, inst) == res.cost
    assert len(res.matching) == inst.n


@given(instances(max_n=7))
def test_prefix_monotone_and_consistent(inst):
    inc = opt_prefix(inst)
    assert inc == opt_prefix(inst, method="dp")
    assert all(a <= b for a, b in zip(inc, inc[1:]))


@given(instances(max_n=7))
def test_reflection_invariant(inst):
    flip = [-x for x in inst.servers], [-x for x in inst.requests]
    assert opt_dp(inst.servers, inst.requests).cost == opt_dp(*flip).cost
