"""Seeded instance generators.

All randomness comes from ``numpy.random.Generator(PCG64(SeedSequence(...)))``
so a (generator, parameters, seed) triple fixes the instance on any
platform with the same numpy bit generator.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence, Union

import numpy as np

from linerecourse.line_model import Instance, InstanceError

RNG_NAME = "numpy.PCG64"
RNG_VERSION = 1

SeedLike = Union[int, Sequence[int]]


def make_rng(seed: SeedLike) -> np.random.Generator:
    entropy = [int(seed)] if np.isscalar(seed) else [int(x) for x in seed]
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))


def gen_uniform(n: int, m: int, range_: int, seed: SeedLike) -> Instance:
    """``m`` servers and ``n`` requests i.i.d. uniform on the integers ``[0, range_]``."""
    if n > m:
        raise InstanceError(f"n > m: {n} > {m}")
    if n < 0 or range_ < 0:
        raise InstanceError("sizes and range must be nonnegative")
    rng = make_rng(seed)
    servers = rng.integers(0, range_ + 1, size=m)
    requests = rng.integers(0, range_ + 1, size=n)
    return Instance(tuple(int(x) for x in servers), tuple(int(x) for x in requests))


def _bit_reverse_order(n: int) -> list[int]:
    bits = max(1, (n - 1).bit_length())
    return sorted(range(n), key=lambda i: int(format(i, f"0{bits}b")[::-1], 2))


def gen_adversarial_doubling(levels: int, seed: SeedLike) -> Instance:
    """``2**levels`` requests between ``2**levels + 1`` evenly spaced servers.

    Requests arrive in bit-reversed order of their slots, so later arrivals
    fall between earlier ones and search intervals grow level by level.
    Each request is nudged inside its slot by a seeded offset in
    ``(1/4, 3/4)`` so that ties are rare but the nesting survives.
    """
    if levels < 1:
        raise InstanceError("levels must be at least 1")
    n = 1 << levels
    rng = make_rng(seed)
    nudge = rng.integers(1, 16, size=n)
    servers = tuple(Fraction(2 * j) for j in range(n + 1))
    slots = [Fraction(2 * j + 1) + Fraction(int(nudge[j]) - 8, 32) for j in range(n)]
    order = _bit_reverse_order(n)
    return Instance(servers, tuple(slots[j] for j in order))


def gen_alternating(n: int, seed: SeedLike, gap_max: int) -> Instance:
    """Strictly alternating instance with ``n`` requests and ``n + 1`` servers.

    Consecutive points are ``1..gap_max`` apart; requests arrive in a
    seeded random order.
    """
    if n < 1:
        raise InstanceError("n must be at least 1")
    if gap_max < 1:
        raise InstanceError("gap_max must be at least 1")
    rng = make_rng(seed)
    gaps = rng.integers(1, gap_max + 1, size=2 * n)
    xs = np.concatenate([[0], np.cumsum(gaps)]).tolist()
    servers = tuple(int(x) for x in xs[0::2])
    slots = [int(x) for x in xs[1::2]]
    order = rng.permutation(n)
    return Instance(servers, tuple(slots[int(j)] for j in order))


def gen_alternating_delta(n: int, log2_delta: int, seed: SeedLike) -> Instance:
    """Alternating instance whose distance ratio is steered towards ``2**log2_delta``.

    One gap is 1 and the others are uniform in ``[1, g]`` with ``g`` chosen
    so the total span, which sets the largest distance, is about
    ``2**log2_delta``.  The realized ratio is returned by
    :func:`linerecourse.alternating.delta`.
    """
    if n < 1:
        raise InstanceError("n must be at least 1")
    target = 1 << log2_delta
    if 2 * n > target:
        raise InstanceError(f"n = {n} too large for delta 2^{log2_delta}")
    rng = make_rng(seed)
    g = max(1, (2 * target) // (2 * n) - 1)
    gaps = rng.integers(1, g + 1, size=2 * n)
    gaps[int(rng.integers(0, 2 * n))] = 1
    xs = np.concatenate([[0], np.cumsum(gaps)]).tolist()
    servers = tuple(int(x) for x in xs[0::2])
    slots = [int(x) for x in xs[1::2]]
    order = rng.permutation(n)
    return Instance(servers, tuple(slots[int(j)] for j in order))


GENERATORS = {
    "uniform": gen_uniform,
    "doubling": gen_adversarial_doubling,
    "alternating": gen_alternating,
    "alternating-delta": gen_alternating_delta,
}


def generate(name: str, params: dict, seed: SeedLike) -> Instance:
    if name == "uniform":
        n = int(params["n"])
        # m_factor lets a sweep over n keep m proportional
        m = params.get("m") or int(params.get("m_factor", 1)) * n
        return gen_uniform(n, int(m), int(params.get("range", 10**6)), seed)
    if name == "doubling":
        return gen_adversarial_doubling(int(params["levels"]), seed)
    if name == "alternating":
        return gen_alternating(int(params["n"]), seed, int(params.get("gap_max", 100)))
    if name == "alternating-delta":
        return gen_alternating_delta(int(params["n"]), int(params["log2_delta"]), seed)
    raise ValueError(f"unknown generator {name!r}")
