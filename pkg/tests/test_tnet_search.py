from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from linerecourse.line_model import AltPath, Instance, InstanceError, matching_cost
from linerecourse.opt_oracle import opt_dp
from linerecourse.tnet_search import (
    NoFreeServerError,
    TNetEngine,
    as_t,
    co_net_cost,
    min_aug_path,
    search_interval,
    t_net_cost,
)

from strategies import instances, rational_positions

EX = Instance((0, 10), (3, 1))


def test_t_must_exceed_one():
    assert as_t("3/2") == Fraction(3, 2)
    for bad in (1, "1/2", 0):
        with pytest.raises(ValueError):
            as_t(bad)


def test_net_costs_single_edges():
    inst = Instance((0, 10), (4, 5))
    P = AltPath((0, 0))
    assert t_net_cost(P, {}, 3, inst) == 12
    assert co_net_cost(P, {}, 3, inst) == -4
    # a path made of one matched edge is a degenerate alternating path
    Q = AltPath((1, 0))
    M = {1: 0}
    assert t_net_cost(Q, M, 3, inst) == -5
    assert co_net_cost(Q, M, 3, inst) == 15


def test_net_costs_two_request_example():
    P = AltPath((1, 0, 0, 1))
    M = {0: 0}
    phi = t_net_cost(P, M, 3, EX)
    psi = co_net_cost(P, M, 3, EX)
    assert (phi, psi) == (21, 1)
    assert phi + psi == 2 * P.cost(EX)


def test_malformed_path_rejected():
    with pytest.raises(InstanceError):
        t_net_cost(AltPath((1, 0, 0, 1)), {}, 3, EX)


@pytest.mark.parametrize("engine", ["potentials", "reference"])
def test_running_example_searches(engine):
    ps = min_aug_path({}, 0, EX, 3, engine=engine)
    assert ps.path.vertices == (0, 0) and ps.phi == 9 and ps.endpoint == 0
    assert search_interval(ps, Fraction(3), 3) == (0, 6)
    ps = min_aug_path({0: 0}, 1, EX, 3, engine=engine)
    assert ps.path.vertices == (1, 0, 0, 1)
    assert ps.phi == 21 and ps.endpoint == 1
    assert ps.labels[("r", 1)] == 0 and ps.labels[("r", 0)] == 0
    assert search_interval(ps, Fraction(1), 3) == (-6, 10)


def test_coincident_request_is_free():
    inst = Instance((0, 7), (7,))
    ps = min_aug_path({}, 0, inst, 3)
    assert ps.phi == 0 and ps.path.vertices == (0, 1)
    assert search_interval(ps, Fraction(7), 3) is None


def test_tie_break_prefers_left_endpoint():
    inst = Instance((0, 10), (5,))
    assert min_aug_path({}, 0, inst, 3).endpoint == 0
    assert min_aug_path({}, 0, inst, 3, engine="reference").endpoint == 0


def test_no_free_server():
    inst = Instance((0,), (1, 2))
    with pytest.raises(NoFreeServerError):
        min_aug_path({0: 0}, 1, inst, 3)


def _brute_min_phi(M, r, inst, t):
    """Smallest t-net cost over all augmenting paths from r, by exhaustive DFS."""
    holder = {s: q for q, s in M.items()}
    best = None

    def walk(verts, used_s):
        nonlocal best
        q = verts[-1]
        for s in range(inst.m):
            if s in used_s:
                continue
            v = verts + (s,)
            if s not in holder:
                phi = t_net_cost(AltPath(v), M, t, inst)
                best = phi if best is None else min(best, phi)
            else:
                walk(v + (holder[s],), used_s | {s})

    walk((r,), frozenset())
    return best


@st.composite
def search_states(draw):
    inst = draw(instances(max_n=5, extra=2, coords=rational_positions))
    t = draw(st.sampled_from([Fraction(3), Fraction(3, 2), Fraction(9, 8)]))
    k = draw(st.integers(0, inst.n - 1))
    return inst, t, k


@settings(max_examples=120)
@given(search_states())
def test_search_is_minimal_and_engines_agree(state):
    inst, t, k = state
    eng = TNetEngine(inst, t)
    for r in range(k):
        eng.augment(eng.search(r).path)
    M = dict(eng.m_off)
    pot = eng.search(k)
    ref = eng.reference_search(k)
    assert (pot.phi, pot.path) == (ref.phi, ref.path)
    assert pot.phi >= 0
    assert t_net_cost(pot.path, M, t, inst) == pot.phi
    assert co_net_cost(pot.path, M, t, inst) + pot.phi == (t - 1) * pot.path.cost(inst)
    assert pot.phi == _brute_min_phi(M, k, inst, t)
    pot.path.check_augmenting(M)
    si = pot.si
    if pot.phi > 0:
        assert si[0] < inst.requests[k] < si[1]
    else:
        assert si is None


@settings(max_examples=80)
@given(instances(max_n=7, extra=2))
def test_prefix_bound_and_compiled_agreement(inst):
    t = Fraction(3)
    a = TNetEngine(inst, t, compiled=True)
    b = TNetEngine(inst, t, compiled=False)
    for r in range(inst.n):
        pa, pb = a.search(r), b.search(r)
        assert (pa.phi, pa.path, pa.si) == (pb.phi, pb.path, pb.si)
        a.augment(pa.path)
        b.augment(pb.path)
        opt = opt_dp(inst.servers, inst.requests[: r + 1]).cost
        assert a.matching() == b.matching()
        assert matching_cost(a.matching(), inst) <= t * opt
