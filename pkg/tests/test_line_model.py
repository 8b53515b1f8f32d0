from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from linerecourse.line_model import (
    AltPath,
    Instance,
    InstanceError,
    Matching,
    dist,
    format_rat,
    matching_cost,
    parse_rat,
    sym_diff_decompose,
    validate_instance,
)

from strategies import instances, rational_positions

EX = Instance((0, 10), (3, 1))


@pytest.mark.parametrize("a,b,want", [(3, 7, 4), (-2, -2, 0), (Fraction(1, 2), Fraction(-3, 2), 2)])
def test_dist(a, b, want):
    assert dist(Fraction(a), Fraction(b)) == want


def test_parse_and_format_round_trip():
    assert parse_rat("6/4") == Fraction(3, 2)
    assert parse_rat(" -7 ") == -7
    assert format_rat(Fraction(3, 2)) == "3/2"
    assert format_rat(Fraction(4)) == 4
    for bad in ("1/0", "1/-2", "x", True, 1.5):
        with pytest.raises(InstanceError):
            parse_rat(bad)


def test_matching_cost_examples():
    assert matching_cost({}, EX) == 0
    assert matching_cost({0: 0, 1: 1}, EX) == 12
    assert matching_cost({0: 1, 1: 0}, EX) == 8
    with pytest.raises(InstanceError):
        matching_cost({0: 5}, EX)


def test_matching_rejects_shared_server():
    with pytest.raises(InstanceError):
        Matching({0: 1, 1: 1})


def test_validate_instance():
    assert validate_instance(Instance((0,), (1, 2))) == ["n > m: 2 requests but only 1 servers"]
    assert validate_instance(Instance((0, 10), (3,))) == []
    assert any("empty server" in e for e in validate_instance(Instance((), ())))


def test_json_round_trip(tmp_path):
    inst = Instance(("1/2", 3), ("-5/3",))
    p = tmp_path / "i.json"
    inst.dump(p)
    assert Instance.load(p) == inst
    assert inst.to_json_obj() == {"servers": ["1/2", 3], "requests": ["-5/3"]}
    assert inst.scale == 6 and inst.scaled == ((3, 18), (-10,))


def test_sym_diff_identity_and_swap():
    assert sym_diff_decompose({0: 0}, {0: 0}) == []
    (c,) = sym_diff_decompose({0: 0}, {0: 1})
    assert c.kind == "path"
    assert set(c.vertices) == {("s", 0), ("r", 0), ("s", 1)}
    assert c.vertices[1] == ("r", 0)


def test_sym_diff_four_cycle():
    (c,) = sym_diff_decompose({0: 0, 1: 1}, {0: 1, 1: 0})
    assert c.kind == "cycle"
    assert len(c.vertices) == 4
    assert c.edges() == {frozenset(e) for e in [(("r", 0), ("s", 0)), (("s", 0), ("r", 1)),
                                                (("r", 1), ("s", 1)), (("s", 1), ("r", 0))]}


@st.composite
def matching_pairs(draw):
    n = draw(st.integers(0, 6))
    m = n + draw(st.integers(0, 3))
    p1 = draw(st.permutations(range(m)))
    p2 = draw(st.permutations(range(m)))
    k1 = draw(st.integers(0, n))
    k2 = draw(st.integers(0, n))
    return {r: p1[r] for r in range(k1)}, {r: p2[r] for r in range(k2)}


@given(matching_pairs())
def test_sym_diff_partitions_edges(pair):
    M1, M2 = pair
    comps = sym_diff_decompose(M1, M2)
    want = {frozenset((("r", r), ("s", s))) for r, s in set(M1.items()) ^ set(M2.items())}
    got = set()
    seen = set()
    for c in comps:
        assert not (set(c.vertices) & seen)
        seen |= set(c.vertices)
        got |= c.edges()
        if c.kind == "cycle":
            assert len(c.vertices) % 2 == 0
        # consecutive edges alternate between the two matchings
        edges = [tuple(sorted((c.vertices[k], c.vertices[k + 1]))) for k in range(len(c.vertices) - 1)]
        owner = [(e[0][1], e[1][1]) in M1.items() for e in ((x if x[0][0] == "r" else (x[1], x[0])) for x in edges)]
        assert all(owner[k] != owner[k + 1] for k in range(len(owner) - 1))
    assert got == want


@given(rational_positions, rational_positions)
def test_rat_exact(a, b):
    assert (a + b) - b == a


@given(instances(), st.integers(-50, 50))
def test_cost_translation_invariant(inst, shift):
    M = {r: r for r in range(inst.n)}
    moved = Instance(tuple(x + shift for x in inst.servers), tuple(x + shift for x in inst.requests))
    assert matching_cost(M, inst) == matching_cost(M, moved)


def test_alt_path_shape_and_costs():
    P = AltPath((1, 0, 0, 1))
    assert P.edges() == [(1, 0), (0, 0), (0, 1)]
    M = {0: 0}
    assert P.tags(M) == [False, True, False]
    P.check_augmenting(M)
    assert P.cost_split(EX, M) == (1 + 7, 3)
    assert P.segment(EX) == (0, 10)
    assert Matching(M).augment(P) == Matching({1: 0, 0: 1})
    with pytest.raises(InstanceError):
        AltPath((0, 1, 0, 2))
    with pytest.raises(InstanceError):
        P.check_augmenting({1: 0})
