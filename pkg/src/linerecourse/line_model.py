"""Points, instances, matchings and alternating paths on the real line.

Every coordinate and cost is a :class:`fractions.Fraction`; nothing in the
algorithmic core touches floating point.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Iterator, Mapping, Sequence, Union

Rat = Fraction
RatLike = Union[int, str, Fraction]


class InstanceError(ValueError):
    """Raised for malformed instances or dangling matching indices."""


def parse_rat(value: RatLike) -> Fraction:
    """Normalize an integer, a Fraction or a ``"p/q"`` string to a Fraction.

    >>> parse_rat("6/4")
    Fraction(3, 2)
    >>> parse_rat(-7)
    Fraction(-7, 1)
    """
    if isinstance(value, bool):
        raise InstanceError(f"booleans are not positions: {value!r}")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        num, sep, den = text.partition("/")
        try:
            p = int(num)
            q = int(den) if sep else 1
        except ValueError:
            raise InstanceError(f"not a rational literal: {value!r}") from None
        if q <= 0:
            raise InstanceError(f"denominator must be positive: {value!r}")
        return Fraction(p, q)
    raise InstanceError(f"unsupported number type {type(value).__name__}: {value!r}")


def format_rat(x: Fraction) -> Union[int, str]:
    """JSON form of a rational: a plain int when integral, else ``"p/q"``."""
    if x.denominator == 1:
        return x.numerator
    return f"{x.numerator}/{x.denominator}"


def dist(a: Fraction, b: Fraction) -> Fraction:
    return abs(a - b)


def common_scale(values: Iterable[Fraction]) -> int:
    """Least common denominator of ``values`` (1 for an empty input)."""
    scale = 1
    for v in values:
        scale = math.lcm(scale, v.denominator)
    return scale


@dataclass(frozen=True)
class Instance:
    """Server positions and request positions, requests in arrival order."""

    servers: tuple[Fraction, ...]
    requests: tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, "servers", tuple(parse_rat(x) for x in self.servers))
        object.__setattr__(self, "requests", tuple(parse_rat(x) for x in self.requests))

    @property
    def n(self) -> int:
        return len(self.requests)

    @property
    def m(self) -> int:
        return len(self.servers)

    def prefix(self, i: int) -> "Instance":
        return Instance(self.servers, self.requests[:i])

    @cached_property
    def scale(self) -> int:
        return common_scale(self.servers + self.requests)

    @cached_property
    def scaled(self) -> tuple[tuple[int, ...], tuple[int, ...]]:
        """Integer positions ``x * scale`` for servers and requests."""
        L = self.scale
        return (
            tuple(int(x * L) for x in self.servers),
            tuple(int(x * L) for x in self.requests),
        )

    def to_json_obj(self) -> dict:
        return {
            "servers": [format_rat(x) for x in self.servers],
            "requests": [format_rat(x) for x in self.requests],
        }

    @classmethod
    def from_json_obj(cls, obj: Mapping) -> "Instance":
        if not isinstance(obj, Mapping) or "servers" not in obj or "requests" not in obj:
            raise InstanceError('instance JSON needs "servers" and "requests" arrays')
        return cls(tuple(obj["servers"]), tuple(obj["requests"]))

    def dumps(self) -> str:
        return json.dumps(self.to_json_obj())

    @classmethod
    def loads(cls, text: str) -> "Instance":
        return cls.from_json_obj(json.loads(text))

    @classmethod
    def load(cls, path) -> "Instance":
        with open(path) as fh:
            return cls.loads(fh.read())

    def dump(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.dumps())
            fh.write("\n")


def validate_instance(inst: Instance) -> list[str]:
    """Return a list of problems; an empty list means the instance is usable."""
    errors = []
    if inst.m == 0:
        errors.append("servers: empty server list")
    if inst.n == 0:
        errors.append("requests: empty request list")
    if inst.n > inst.m:
        errors.append(f"n > m: {inst.n} requests but only {inst.m} servers")
    for name, values in (("servers", inst.servers), ("requests", inst.requests)):
        for idx, v in enumerate(values):
            if not isinstance(v, Fraction):
                errors.append(f"{name}[{idx}]: not a rational ({v!r})")
    return errors


class Matching(Mapping[int, int]):
    """Immutable partial map request index -> server index, injective."""

    __slots__ = ("_fwd", "_inv")

    def __init__(self, assignment: Union[Mapping[int, int], Iterable[tuple[int, int]], None] = None):
        fwd = dict(assignment or {})
        inv = {}
        for r, s in fwd.items():
            if s in inv:
                raise InstanceError(f"server {s} used by requests {inv[s]} and {r}")
            inv[s] = r
        self._fwd = fwd
        self._inv = inv

    def __getitem__(self, r: int) -> int:
        return self._fwd[r]

    def __iter__(self) -> Iterator[int]:
        return iter(self._fwd)

    def __len__(self) -> int:
        return len(self._fwd)

    def __repr__(self) -> str:
        return f"Matching({dict(sorted(self._fwd.items()))})"

    def __eq__(self, other) -> bool:
        if isinstance(other, Matching):
            return self._fwd == other._fwd
        return NotImplemented

    def __hash__(self) -> int:
        return hash(frozenset(self._fwd.items()))

    def request_of(self, s: int):
        """Request matched to server ``s`` or None."""
        return self._inv.get(s)

    def servers(self) -> frozenset[int]:
        return frozenset(self._inv)

    def edges(self) -> frozenset[tuple[int, int]]:
        return frozenset(self._fwd.items())

    def augment(self, path: "AltPath") -> "Matching":
        """Symmetric difference with the edges of ``path``."""
        fwd = dict(self._fwd)
        edges = path.edges()
        drop = [(r, s) for r, s in edges if fwd.get(r) == s]
        for r, s in drop:
            del fwd[r]
        for r, s in edges:
            if (r, s) not in drop:
                fwd[r] = s
        return Matching(fwd)


def matching_cost(M: Mapping[int, int], inst: Instance) -> Fraction:
    total = Fraction(0)
    for r, s in M.items():
        if not (0 <= r < inst.n and 0 <= s < inst.m):
            raise InstanceError(f"dangling edge ({r}, {s})")
        total += dist(inst.requests[r], inst.servers[s])
    return total


@dataclass(frozen=True)
class AltPath:
    """Alternating path r0, s0, r1, s1, ..., rk, sk.

    ``vertices`` holds request indices at even positions and server indices
    at odd positions.  Whether an edge is "matched" is always relative to a
    reference matching; for an augmenting path the edges (r_j, s_j) are the
    non-matching ones.
    """

    vertices: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(self.vertices))
        if len(self.vertices) < 2 or len(self.vertices) % 2:
            raise InstanceError(f"alternating path needs even length >= 2: {self.vertices}")
        reqs, srvs = self.requests, self.servers
        if len(set(reqs)) != len(reqs) or len(set(srvs)) != len(srvs):
            raise InstanceError(f"alternating path repeats a vertex: {self.vertices}")

    @property
    def requests(self) -> tuple[int, ...]:
        return self.vertices[0::2]

    @property
    def servers(self) -> tuple[int, ...]:
        return self.vertices[1::2]

    @property
    def start(self) -> int:
        return self.vertices[0]

    @property
    def endpoint(self) -> int:
        return self.vertices[-1]

    def __len__(self) -> int:
        """Number of edges."""
        return len(self.vertices) - 1

    def edges(self) -> list[tuple[int, int]]:
        """Edges in path order, each as (request, server)."""
        v = self.vertices
        out = []
        for k in range(len(v) - 1):
            out.append((v[k], v[k + 1]) if k % 2 == 0 else (v[k + 1], v[k]))
        return out

    def tags(self, M: Mapping[int, int]) -> list[bool]:
        """Per edge: True when it belongs to ``M``."""
        return [M.get(r) == s for r, s in self.edges()]

    def check_alternating(self, M: Mapping[int, int]) -> None:
        """Raise unless the tags alternate after the first non-matching edge."""
        tags = self.tags(M)
        try:
            first = tags.index(False)
        except ValueError:
            return
        for k in range(first + 1, len(tags)):
            if tags[k] == tags[k - 1]:
                raise InstanceError(f"path {self.vertices} does not alternate at edge {k}")

    def check_augmenting(self, M: Mapping[int, int]) -> None:
        """Raise unless this path starts unmatched and ends at a free server."""
        if self.start in M:
            raise InstanceError(f"path start r{self.start} is already matched")
        tags = self.tags(M)
        if any(tags[k] != (k % 2 == 1) for k in range(len(tags))):
            raise InstanceError(f"path {self.vertices} is not augmenting")
        if self.endpoint in set(M.values()):
            raise InstanceError(f"path endpoint s{self.endpoint} is not free")

    def cost_split(self, inst: Instance, M: Mapping[int, int]) -> tuple[Fraction, Fraction]:
        """(cost of edges outside ``M``, cost of edges inside ``M``)."""
        R, S = inst.requests, inst.servers
        new = Fraction(0)
        old = Fraction(0)
        for r, s in self.edges():
            if M.get(r) == s:
                old += dist(R[r], S[s])
            else:
                new += dist(R[r], S[s])
        return new, old

    def cost(self, inst: Instance) -> Fraction:
        R, S = inst.requests, inst.servers
        return sum((dist(R[r], S[s]) for r, s in self.edges()), Fraction(0))

    def segment(self, inst: Instance) -> tuple[Fraction, Fraction]:
        pts = [inst.requests[r] for r in self.requests] + [inst.servers[s] for s in self.servers]
        return min(pts), max(pts)


Vertex = tuple[str, int]


@dataclass(frozen=True)
class SymDiffComponent:
    kind: str  # "path" | "cycle"
    vertices: tuple[Vertex, ...] = field(default_factory=tuple)

    def edges(self) -> set[frozenset[Vertex]]:
        v = self.vertices
        out = {frozenset((v[k], v[k + 1])) for k in range(len(v) - 1)}
        if self.kind == "cycle":
            out.add(frozenset((v[-1], v[0])))
        return out


def sym_diff_decompose(M1: Mapping[int, int], M2: Mapping[int, int]) -> list[SymDiffComponent]:
    """Split M1 xor M2 into vertex-disjoint alternating paths and cycles.

    Components are ordered by their smallest vertex; paths are listed from
    their smaller endpoint.
    """
    e1 = {(r, s) for r, s in M1.items()}
    e2 = {(r, s) for r, s in M2.items()}
    adj: dict[Vertex, list[Vertex]] = {}
    for r, s in e1 ^ e2:
        adj.setdefault(("r", r), []).append(("s", s))
        adj.setdefault(("s", s), []).append(("r", r))
    seen: set[Vertex] = set()
    comps = []
    ends = sorted(v for v, nb in adj.items() if len(nb) == 1)
    for v0 in ends:
        if v0 in seen:
            continue
        walk = [v0]
        seen.add(v0)
        prev, cur = None, v0
        while True:
            nxt = [w for w in adj[cur] if w != prev and w not in seen]
            if not nxt:
                break
            prev, cur = cur, nxt[0]
            walk.append(cur)
            seen.add(cur)
        comps.append(SymDiffComponent("path", tuple(walk)))
    for v0 in sorted(adj):
        if v0 in seen:
            continue
        walk = [v0]
        seen.add(v0)
        prev, cur = None, v0
        while True:
            nxt = [w for w in adj[cur] if w != prev and w not in seen]
            if not nxt:
                break
            prev, cur = cur, min(nxt)
            walk.append(cur)
            seen.add(cur)
        comps.append(SymDiffComponent("cycle", tuple(walk)))
    comps.sort(key=lambda c: min(c.vertices))
    return comps


def as_matching(M: Union[Matching, Mapping[int, int], Sequence[tuple[int, int]]]) -> Matching:
    return M if isinstance(M, Matching) else Matching(M)
