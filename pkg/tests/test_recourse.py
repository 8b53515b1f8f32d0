import io
import json
from fractions import Fraction

import pytest
from hypothesis import given, settings

from linerecourse.line_model import Instance, matching_cost
from linerecourse.opt_oracle import opt_dp, opt_prefix
from linerecourse.recourse import (
    ACTIVE,
    DETOUR,
    FROZEN,
    RecourseState,
    StructureError,
    component_start,
    current_matching,
    detour_target,
    run_recourse,
    update_freezing,
)

from strategies import instances, rational_positions

EX = Instance((0, 10), (3, 1))


def test_detour_target_examples():
    assert detour_target({0: 0}, {}, 0) == 0
    assert detour_target({0: 0, 1: 1}, {1: 0}, 0) == 1
    assert detour_target({0: 0, 1: 1, 2: 2}, {1: 0, 2: 1}, 0) == 2
    with pytest.raises(ValueError):
        detour_target({0: 0, 1: 1}, {0: 1}, 0)
    # a corrupted structure that loops back is a hard error
    with pytest.raises(StructureError):
        detour_target({0: 0, 1: 1, 2: 0}, {1: 0, 2: 1}, 0)


def test_component_start_walks_back_over_frozen():
    # m_off: r0-s0, r1-s1, r2-s2 ; frozen r1 on s0 and r2 on s1
    inv = {0: 0, 1: 1, 2: 2}
    assert component_start(inv, {1: 0, 2: 1}, 2) == 0
    assert component_start(inv, {}, 1) == 1


def test_running_example():
    st = RecourseState(EX, 3)
    st.arrive(0)
    assert st.status(0) == ACTIVE
    # i = 2, OPT_2 = 8: cost 3 > 8/4, so nothing freezes before the second arrival
    assert update_freezing(st, 2) == []
    step = st.arrive(1)
    assert step.record.new_top_block and step.reassignments == 0
    assert dict(current_matching(st)) == {0: 0, 1: 1}
    assert st.status(0) == DETOUR and st.status(1) == ACTIVE
    assert st.total_reassign == 0 and st.cost() == 12


def test_zero_distance_pairs_freeze_for_good():
    inst = Instance((0, 3, 8, 20), (20, 3, 0, 8))
    st = run_recourse(inst, 3)
    assert all(st.status(r) == FROZEN for r in range(inst.n))
    assert st.total_reassign == 0 and st.cost() == 0
    assert [e.kind for e in st.events].count("unfreeze") == 0


def test_nested_arrivals_force_recourse():
    # hand trace: r(2) -> s(0) [phi 6]; r(1) -> s(5) via r(1)-s(0)-r(2)-s(5) [phi 10];
    # r(9) -> s(21) [phi 36] with I_3 = (-7, 21) a new top block: both earlier
    # requests move to their offline partners r(2)->s(5), r(1)->s(0)
    inst = Instance((0, 5, 21), (2, 1, 9))
    st = run_recourse(inst, 3)
    recs = st.runner.records
    assert [r.phi for r in recs] == [6, 10, 36]
    assert recs[1].li.interval == (Fraction(-7, 3), 5)
    assert recs[2].li.interval == (-7, 21)
    moves = [(e.request, e.from_server, e.to_server) for e in st.events if e.kind == "recourse"]
    assert sorted(moves) == [(0, 0, 1), (1, 1, 0)]
    assert st.total_reassign == 2
    assert dict(st.M) == {0: 1, 1: 0, 2: 2}
    assert st.cost() == 16 == opt_dp(inst.servers, inst.requests).cost
    assert st.runner.on_cost() == 18


def test_unfreeze_repair_regression():
    inst = Instance((18, 38, 43, 47, 49, 56), (23, 13, 41, 58, 47))
    st = run_recourse(inst, 3)
    assert st.freeze_pairs == [(0, 2, 5)]
    opt = opt_prefix(inst)
    c0 = abs(inst.requests[0] - inst.servers[st.runner.m_on[0]])
    # frozen at i = 2 on c <= OPT_2 / 4, released at i = 5 on c > OPT_5 / 5, not before
    assert c0 * 4 <= opt[1]
    assert all(c0 * i <= opt[i - 1] for i in (3, 4)) and c0 * 5 > opt[4]
    repairs = [e for e in st.events if e.kind == "repair"]
    assert [(e.i, e.request) for e in repairs] == [(4, 0), (4, 1)]
    assert st.freeze_persistence_violations() == []


def test_event_log_serialization():
    st = run_recourse(EX, 3)
    buf = io.StringIO()
    st.write_events(buf)
    rows = [json.loads(x) for x in buf.getvalue().splitlines()]
    assert {"kind": "assign", "i": 1, "request": 1, "from_server": None, "to_server": 1} in rows
    assert set(rows[0]) == {"kind", "i", "request", "from_server", "to_server"}


def _check_state(st, inst, i, opt_i):
    M = current_matching(st)
    assert len(M) == i
    fc = sum((abs(inst.requests[r] - inst.servers[s]) for r, s in st.m_f.items()), Fraction(0))
    assert fc <= opt_i
    ic = sum((abs(inst.requests[r] - inst.servers[M[r]]) for r in M if st.status(r) != ACTIVE),
             Fraction(0))
    assert ic <= (st.t + 2) * opt_i
    for r in M:
        if st.status(r) in (FROZEN,):
            assert M[r] == st.runner.m_on[r]
        if st.status(r) == ACTIVE:
            assert M[r] == st.runner.m_on[r]
    assert st.recount() == (st.frozen_cost, st.inactive_cost)


@settings(max_examples=150)
@given(instances(max_n=8, extra=3, coords=rational_positions))
def test_recourse_invariants(inst):
    st = RecourseState(inst, 3, check_reference=True)
    opts = opt_prefix(inst)
    for r in range(inst.n):
        step = st.arrive(r)
        assert step.reassignments <= 3 * max(1, r)
        _check_state(st, inst, r + 1, opts[r])
    assert st.freeze_persistence_violations() == []
    assert st.runner.engine_mismatches == 0
    assert sum(st.reassign) == st.total_reassign
    assert matching_cost(st.M, inst) == st.cost()
    for r, a, b in st.freeze_pairs:
        assert b >= a * a
