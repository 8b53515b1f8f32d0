"""Pure-Python hot kernels.  ``_ckernels.pyx`` mirrors these line by line.

All quantities are integers: positions are pre-multiplied by the common
denominator of the instance and the t-net-cost ``t = a / b`` is carried as
the pair ``(a, b)``, so a non-matching edge of length ``d`` costs ``a * d``
and a matching edge costs ``-b * d``.  Labels are packed as
``key = cost * H + hops`` with ``H`` larger than any hop count, which makes
"cheapest, then fewest edges" a single integer comparison.

Vertices of the residual graph are servers ``0..m-1`` and requests
``0..n-1``; ``s_match[s]`` / ``r_match[r]`` hold the partner or -1.
"""

from __future__ import annotations

import heapq

# Pop order among equal keys: sink, then servers, then requests (by index).
_SINK = 0
_SRV = 1
_REQ = 2


class NegativeCycleError(RuntimeError):
    """The residual graph has a negative cycle: the matching was not t-feasible."""


class PotentialError(RuntimeError):
    """A reduced cost went negative: the dual potentials are corrupted."""


def hop_base(n: int, m: int) -> int:
    return 2 * (n + m) + 4


def _extract_path(src, endpoint, key_s, key_r, done_s, done_r, spos, rpos,
                  s_match, r_match, pi_s, pi_r, a, b, H, explored_r):
    """Lexicographically smallest vertex sequence among tied shortest paths."""
    in_s = {endpoint}
    in_r = set()
    stack = [(_SRV, endpoint)]
    while stack:
        kind, v = stack.pop()
        if kind == _SRV:
            kv = key_s[v]
            for u in explored_r:
                rc = a * abs(spos[v] - rpos[u]) + pi_r[u] - pi_s[v]
                if key_r[u] + rc * H + 1 == kv and u not in in_r:
                    in_r.add(u)
                    stack.append((_REQ, u))
        elif v != src:
            s = r_match[v]
            rc = -b * abs(spos[s] - rpos[v]) + pi_s[s] - pi_r[v]
            if done_s[s] and key_s[s] + rc * H + 1 == key_r[v] and s not in in_s:
                in_s.add(s)
                stack.append((_SRV, s))
    path = [src]
    u = src
    while True:
        best = -1
        ku = key_r[u]
        for s in in_s:
            if best >= 0 and s >= best:
                continue
            rc = a * abs(spos[s] - rpos[u]) + pi_r[u] - pi_s[s]
            if ku + rc * H + 1 == key_s[s]:
                best = s
        if best < 0:
            raise PotentialError("tie DAG lost the endpoint")
        path.append(best)
        if best == endpoint:
            return path
        u = s_match[best]
        path.append(u)


def dijkstra_search(spos, rpos, pi_s, pi_r, s_match, r_match, s_alive, src, a, b, want_si):
    """One Hungarian-style search from request ``src`` with reduced costs.

    Returns ``(phi, path, exp_s, lab_s, exp_r, lab_r)``: the true t-net-cost
    of the chosen path, the path, and the explored servers/requests with
    their true labels (min t-net-cost from ``src``); returns None when no
    free server exists.  With ``want_si`` the search keeps going until
    every request whose true label is below ``phi`` is finalized.  On return
    the potentials are updated (capped at the sink distance) and shifted so
    free servers sit at zero.  Matchings are not touched.
    """
    m = len(spos)
    n = len(rpos)
    H = hop_base(n, m)
    x = rpos[src]
    start = None
    piT = None
    dfree = None
    for s in range(m):
        if not s_alive[s]:
            continue
        v = pi_s[s] - a * abs(spos[s] - x)
        if start is None or v > start:
            start = v
        if s_match[s] < 0:
            if piT is None or pi_s[s] < piT:
                piT = pi_s[s]
            d = abs(spos[s] - x)
            if dfree is None or d < dfree:
                dfree = d
    if piT is None:
        return None
    pi_r[src] = start
    G = 0
    if want_si:
        for r in range(n):
            s = r_match[r]
            if s >= 0 and s_alive[s] and piT - pi_r[r] > G:
                G = piT - pi_r[r]

    inf = None
    key_s = [inf] * m
    key_r = [inf] * n
    done_s = [False] * m
    done_r = [False] * n
    explored_s = []
    explored_r = []
    key_r[src] = 0
    heap = [(0, _REQ, src)]
    keyT = None
    # the direct edge to the nearest free server bounds the sink key
    tentT = (a * dfree + start - piT) * H + 2
    prune = tentT + G * H + 1
    stop = None
    while heap:
        k, kind, v = heapq.heappop(heap)
        if stop is not None and k >= stop:
            break
        if kind == _SINK:
            if keyT is None:
                keyT = k
                stop = max(keyT, (keyT // H + G) * H)
            continue
        if kind == _REQ:
            if done_r[v] or k != key_r[v]:
                continue
            done_r[v] = True
            explored_r.append(v)
            pu = pi_r[v]
            pos = rpos[v]
            for s in range(m):
                if done_s[s] or not s_alive[s]:
                    continue
                rc = a * abs(spos[s] - pos) + pu - pi_s[s]
                if rc < 0:
                    raise PotentialError(f"negative reduced cost r{v}->s{s}")
                nk = k + rc * H + 1
                if nk >= prune:
                    continue
                ks = key_s[s]
                if ks is None or nk < ks:
                    key_s[s] = nk
                    heapq.heappush(heap, (nk, _SRV, s))
        else:
            if done_s[v] or k != key_s[v]:
                continue
            done_s[v] = True
            explored_s.append(v)
            u = s_match[v]
            if u >= 0:
                if done_r[u]:
                    continue
                rc = -b * abs(spos[v] - rpos[u]) + pi_s[v] - pi_r[u]
                if rc < 0:
                    raise PotentialError(f"negative reduced cost s{v}->r{u}")
                nk = k + rc * H + 1
                if nk >= prune:
                    continue
                ku = key_r[u]
                if ku is None or nk < ku:
                    key_r[u] = nk
                    heapq.heappush(heap, (nk, _REQ, u))
            else:
                nk = k + (pi_s[v] - piT) * H + 1
                if nk <= tentT:
                    tentT = nk
                    prune = tentT + G * H + 1
                    heapq.heappush(heap, (nk, _SINK, 0))

    dT = keyT // H
    cands = [s for s in explored_s
             if s_match[s] < 0 and key_s[s] + (pi_s[s] - piT) * H + 1 == keyT]
    endpoint = min(cands, key=lambda s: (spos[s], s))
    path = _extract_path(src, endpoint, key_s, key_r, done_s, done_r, spos, rpos,
                         s_match, r_match, pi_s, pi_r, a, b, H, explored_r)
    p0 = pi_r[src]
    out = (dT + piT - p0, path,
           explored_s, [key_s[s] // H + pi_s[s] - p0 for s in explored_s],
           explored_r, [key_r[r] // H + pi_r[r] - p0 for r in explored_r])

    shift = piT + dT
    for s in range(m):
        if s_alive[s]:
            d = key_s[s] // H if done_s[s] else dT
            pi_s[s] += (d if d < dT else dT) - shift
    for r in range(n):
        if r == src or r_match[r] >= 0:
            d = key_r[r] // H if done_r[r] else dT
            pi_r[r] += (d if d < dT else dT) - shift
    return out


def spfa_search(spos, rpos, s_match, r_match, s_alive, src, a, b):
    """Label-correcting search on true costs; labels every reachable vertex.

    Returns ``(best_key, path, reached_s, key_s, reached_r, key_r)`` with
    packed true-cost keys, or None without a free server.
    """
    m = len(spos)
    n = len(rpos)
    H = hop_base(n, m)
    key_s = [None] * m
    key_r = [None] * n
    key_r[src] = 0
    updates = [0] * n
    queued = [False] * n
    queue = [src]
    queued[src] = True
    head = 0
    limit = n + m + 1
    while head < len(queue):
        u = queue[head]
        head += 1
        queued[u] = False
        ku = key_r[u]
        pos = rpos[u]
        for s in range(m):
            if not s_alive[s] or s_match[s] == u:
                continue
            nk = ku + a * abs(spos[s] - pos) * H + 1
            ks = key_s[s]
            if ks is not None and nk >= ks:
                continue
            key_s[s] = nk
            v = s_match[s]
            if v < 0:
                continue
            nk2 = nk - b * abs(spos[s] - rpos[v]) * H + 1
            kv = key_r[v]
            if kv is None or nk2 < kv:
                if v == src:
                    raise NegativeCycleError("cycle back to the source request")
                key_r[v] = nk2
                if not queued[v]:
                    # FIFO passes bound enqueues, not relabels
                    updates[v] += 1
                    if updates[v] > limit:
                        raise NegativeCycleError(f"request r{v} queued {updates[v]} times")
                    queued[v] = True
                    queue.append(v)
    best = None
    for s in range(m):
        if s_alive[s] and s_match[s] < 0 and key_s[s] is not None:
            if best is None or key_s[s] < best:
                best = key_s[s]
    if best is None:
        return None
    cands = [s for s in range(m) if s_alive[s] and s_match[s] < 0 and key_s[s] == best]
    endpoint = min(cands, key=lambda s: (spos[s], s))

    # Tie DAG on true costs, walked backwards from the endpoint.
    reached_r = [r for r in range(n) if key_r[r] is not None]
    in_s = {endpoint}
    stack = [endpoint]
    while stack:
        v = stack.pop()
        for u in reached_r:
            if s_match[v] == u:
                continue
            if key_r[u] + a * abs(spos[v] - rpos[u]) * H + 1 == key_s[v] and u != src:
                s = r_match[u]
                if s not in in_s and key_s[s] - b * abs(spos[s] - rpos[u]) * H + 1 == key_r[u]:
                    in_s.add(s)
                    stack.append(s)
    path = [src]
    u = src
    while True:
        nxt = None
        for s in sorted(in_s):
            if s_match[s] != u and key_r[u] + a * abs(spos[s] - rpos[u]) * H + 1 == key_s[s]:
                nxt = s
                break
        if nxt is None:
            raise NegativeCycleError("tie DAG lost the endpoint")
        path.append(nxt)
        if nxt == endpoint:
            break
        u = s_match[nxt]
        path.append(u)
    reached_s = [s for s in range(m) if key_s[s] is not None]
    return (best, path, reached_s, [key_s[s] for s in reached_s],
            reached_r, [key_r[r] for r in reached_r])


def band_dp(S, R):
    """Optimal non-crossing matching of sorted ``R`` into sorted ``S``.

    Request ``i`` (0-based, sorted) can only use sorted servers
    ``i .. i + m - n``.  Returns ``(cost, choice)`` with ``choice[i]`` the
    sorted server index of request ``i``.
    """
    n, m = len(R), len(S)
    w = m - n
    if w < 0:
        raise ValueError("more requests than servers")
    prev = [0] * (w + 1)
    take = []
    for i in range(n):
        ri = R[i]
        cur = [0] * (w + 1)
        row = bytearray(w + 1)
        for d in range(w + 1):
            use = prev[d] + abs(ri - S[i + d])
            if d > 0 and cur[d - 1] <= use:
                cur[d] = cur[d - 1]
            else:
                cur[d] = use
                row[d] = 1
        take.append(row)
        prev = cur
    choice = [0] * n
    d = w
    for i in range(n - 1, -1, -1):
        while not take[i][d]:
            d -= 1
        choice[i] = i + d
    return (prev[w] if n else 0), choice
