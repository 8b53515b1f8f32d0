"""Hypothesis strategies for small instances on the line."""

from fractions import Fraction

from hypothesis import strategies as st

from linerecourse.line_model import Instance

positions = st.integers(-20, 20)
rational_positions = st.builds(Fraction, st.integers(-40, 40), st.sampled_from([1, 2, 3, 4]))


@st.composite
def instances(draw, max_n=6, extra=3, coords=positions, min_n=1):
    n = draw(st.integers(min_n, max_n))
    m = n + draw(st.integers(0, extra))
    servers = draw(st.lists(coords, min_size=m, max_size=m))
    requests = draw(st.lists(coords, min_size=n, max_size=n))
    return Instance(tuple(servers), tuple(requests))


@st.composite
def alternating_instances(draw, max_n=8, gap_max=6):
    n = draw(st.integers(1, max_n))
    gaps = draw(st.lists(st.integers(1, gap_max), min_size=2 * n, max_size=2 * n))
    xs = [0]
    for g in gaps:
        xs.append(xs[-1] + g)
    order = draw(st.permutations(range(n)))
    slots = xs[1::2]
    return Instance(tuple(xs[0::2]), tuple(slots[j] for j in order))
