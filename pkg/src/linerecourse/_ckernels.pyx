# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled twins of the kernels in ``_pykernels``.

Same algorithms, same pop order, same outputs; int64 arithmetic only.  The
caller (``kernels.py``) verifies magnitudes before choosing this path.
"""

from libc.stdlib cimport malloc, free
from libc.string cimport memset

from linerecourse._pykernels import NegativeCycleError as NegativeCycle, PotentialError

ctypedef long long i64

cdef i64 INF = 0x7FFFFFFFFFFFFFFF


cdef inline i64 iabs(i64 x) nogil:
    return -x if x < 0 else x


cdef inline bint hless(i64* key, int a, int b) nogil:
    return key[a] < key[b] or (key[a] == key[b] and a < b)


cdef inline void sift_up(int* heap, int* where, i64* key, int i) nogil:
    cdef int c = heap[i]
    cdef int p
    while i > 0:
        p = (i - 1) >> 1
        if hless(key, c, heap[p]):
            heap[i] = heap[p]
            where[heap[i]] = i
            i = p
        else:
            break
    heap[i] = c
    where[c] = i


cdef inline void sift_down(int* heap, int* where, i64* key, int size, int i) nogil:
    cdef int c = heap[i]
    cdef int ch
    while True:
        ch = 2 * i + 1
        if ch >= size:
            break
        if ch + 1 < size and hless(key, heap[ch + 1], heap[ch]):
            ch += 1
        if hless(key, heap[ch], c):
            heap[i] = heap[ch]
            where[heap[i]] = i
            i = ch
        else:
            break
    heap[i] = c
    where[c] = i


cdef inline void push_or_decrease(int* heap, int* where, i64* key, int* size, int c, i64 k) nogil:
    key[c] = k
    if where[c] < 0:
        heap[size[0]] = c
        where[c] = size[0]
        size[0] += 1
    sift_up(heap, where, key, where[c])


cdef inline int pop_min(int* heap, int* where, i64* key, int* size) nogil:
    cdef int top = heap[0]
    size[0] -= 1
    where[top] = -2
    if size[0] > 0:
        heap[0] = heap[size[0]]
        where[heap[0]] = 0
        sift_down(heap, where, key, size[0], 0)
    return top


def dijkstra_search(const i64[:] spos, const i64[:] rpos, i64[:] pi_s, i64[:] pi_r,
                    const i64[:] s_match, const i64[:] r_match, const unsigned char[:] s_alive,
                    int src, i64 a, i64 b, bint want_si):
    cdef int m = spos.shape[0]
    cdef int n = rpos.shape[0]
    cdef i64 H = 2 * (n + m) + 4
    cdef int V = 1 + m + n
    cdef i64 x = rpos[src]
    cdef i64 start = 0, piT = 0, G = 0, v64, rc, nk, k
    cdef bint have_start = False, have_T = False
    cdef int s, r, u, c, vtx, endpoint
    cdef i64 dfree = INF
    for s in range(m):
        if not s_alive[s]:
            continue
        v64 = pi_s[s] - a * iabs(spos[s] - x)
        if not have_start or v64 > start:
            start = v64
            have_start = True
        if s_match[s] < 0:
            if not have_T or pi_s[s] < piT:
                piT = pi_s[s]
                have_T = True
            if iabs(spos[s] - x) < dfree:
                dfree = iabs(spos[s] - x)
    if not have_T:
        return None
    pi_r[src] = start
    if want_si:
        for r in range(n):
            s = <int>r_match[r]
            if s >= 0 and s_alive[s] and piT - pi_r[r] > G:
                G = piT - pi_r[r]

    cdef i64* key = <i64*>malloc(V * sizeof(i64))
    cdef int* heap = <int*>malloc(V * sizeof(int))
    cdef int* where = <int*>malloc(V * sizeof(int))
    cdef unsigned char* done = <unsigned char*>malloc(V)
    cdef int* order = <int*>malloc(V * sizeof(int))
    cdef int norder = 0
    cdef int size = 0
    cdef i64 keyT = INF, stop = INF, dT, d, shift, p0
    # the direct edge to the nearest free server bounds the sink key
    cdef i64 tentT = (a * dfree + start - piT) * H + 2
    cdef i64 prune = tentT + G * H + 1
    cdef int base_r = 1 + m
    for c in range(V):
        key[c] = INF
        where[c] = -1
        done[c] = 0
    try:
        with nogil:
            push_or_decrease(heap, where, key, &size, base_r + src, 0)
            while size > 0:
                c = heap[0]
                k = key[c]
                if k >= stop:
                    break
                pop_min(heap, where, key, &size)
                if c == 0:
                    keyT = k
                    stop = (keyT // H + G) * H
                    if stop < keyT:
                        stop = keyT
                    continue
                done[c] = 1
                order[norder] = c
                norder += 1
                if c >= base_r:
                    u = c - base_r
                    for s in range(m):
                        if done[1 + s] or not s_alive[s]:
                            continue
                        rc = a * iabs(spos[s] - rpos[u]) + pi_r[u] - pi_s[s]
                        if rc < 0:
                            with gil:
                                raise PotentialError("negative reduced cost r%d->s%d" % (u, s))
                        nk = k + rc * H + 1
                        if nk >= prune:
                            continue
                        if nk < key[1 + s]:
                            push_or_decrease(heap, where, key, &size, 1 + s, nk)
                else:
                    s = c - 1
                    u = <int>s_match[s]
                    if u >= 0:
                        if done[base_r + u]:
                            continue
                        rc = -b * iabs(spos[s] - rpos[u]) + pi_s[s] - pi_r[u]
                        if rc < 0:
                            with gil:
                                raise PotentialError("negative reduced cost s%d->r%d" % (s, u))
                        nk = k + rc * H + 1
                        if nk >= prune:
                            continue
                        if nk < key[base_r + u]:
                            push_or_decrease(heap, where, key, &size, base_r + u, nk)
                    else:
                        nk = k + (pi_s[s] - piT) * H + 1
                        if nk <= tentT:
                            tentT = nk
                            prune = tentT + G * H + 1
                            push_or_decrease(heap, where, key, &size, 0, nk)

        dT = keyT // H
        endpoint = -1
        for c in range(norder):
            vtx = order[c]
            if vtx < base_r:
                s = vtx - 1
                if s_match[s] < 0 and key[vtx] + (pi_s[s] - piT) * H + 1 == keyT:
                    if endpoint < 0 or spos[s] < spos[endpoint] or (spos[s] == spos[endpoint] and s < endpoint):
                        endpoint = s
        path = _extract(src, endpoint, key, done, order, norder, spos, rpos, s_match, r_match,
                        pi_s, pi_r, a, b, H, m)
        p0 = pi_r[src]
        exp_s = []
        ks = []
        exp_r = []
        kr = []
        for c in range(norder):
            vtx = order[c]
            if vtx < base_r:
                exp_s.append(vtx - 1)
                ks.append(key[vtx] // H + pi_s[vtx - 1] - p0)
            else:
                exp_r.append(vtx - base_r)
                kr.append(key[vtx] // H + pi_r[vtx - base_r] - p0)
        out = (dT + piT - p0, path, exp_s, ks, exp_r, kr)

        shift = piT + dT
        for s in range(m):
            if s_alive[s]:
                d = key[1 + s] // H if done[1 + s] else dT
                pi_s[s] += (d if d < dT else dT) - shift
        for r in range(n):
            if r == src or r_match[r] >= 0:
                d = key[base_r + r] // H if done[base_r + r] else dT
                pi_r[r] += (d if d < dT else dT) - shift
        return out
    finally:
        free(key)
        free(heap)
        free(where)
        free(done)
        free(order)


cdef list _extract(int src, int endpoint, i64* key, unsigned char* done, int* order, int norder,
                   const i64[:] spos, const i64[:] rpos, const i64[:] s_match, const i64[:] r_match,
                   i64[:] pi_s, i64[:] pi_r, i64 a, i64 b, i64 H, int m):
    cdef int base_r = 1 + m
    cdef int V = base_r + rpos.shape[0]
    cdef unsigned char* in_dag = <unsigned char*>malloc(V)
    cdef int* stack = <int*>malloc(V * sizeof(int))
    cdef int sp = 0, c, vtx, u, s, best, j
    cdef i64 rc
    memset(in_dag, 0, V)
    try:
        in_dag[1 + endpoint] = 1
        stack[sp] = 1 + endpoint
        sp += 1
        while sp > 0:
            sp -= 1
            vtx = stack[sp]
            if vtx < base_r:
                s = vtx - 1
                for j in range(norder):
                    c = order[j]
                    if c < base_r or in_dag[c]:
                        continue
                    u = c - base_r
                    rc = a * iabs(spos[s] - rpos[u]) + pi_r[u] - pi_s[s]
                    if key[c] + rc * H + 1 == key[vtx]:
                        in_dag[c] = 1
                        stack[sp] = c
                        sp += 1
            else:
                u = vtx - base_r
                if u == src:
                    continue
                s = <int>r_match[u]
                rc = -b * iabs(spos[s] - rpos[u]) + pi_s[s] - pi_r[u]
                if done[1 + s] and not in_dag[1 + s] and key[1 + s] + rc * H + 1 == key[vtx]:
                    in_dag[1 + s] = 1
                    stack[sp] = 1 + s
                    sp += 1
        path = [src]
        u = src
        while True:
            best = -1
            for j in range(norder):
                c = order[j]
                if c >= base_r or not in_dag[c]:
                    continue
                s = c - 1
                if best >= 0 and s >= best:
                    continue
                rc = a * iabs(spos[s] - rpos[u]) + pi_r[u] - pi_s[s]
                if key[base_r + u] + rc * H + 1 == key[c]:
                    best = s
            if best < 0:
                raise PotentialError("tie DAG lost the endpoint")
            path.append(best)
            if best == endpoint:
                return path
            u = <int>s_match[best]
            path.append(u)
    finally:
        free(in_dag)
        free(stack)


def spfa_search(const i64[:] spos, const i64[:] rpos, const i64[:] s_match, const i64[:] r_match,
                const unsigned char[:] s_alive, int src, i64 a, i64 b):
    cdef int m = spos.shape[0]
    cdef int n = rpos.shape[0]
    cdef i64 H = 2 * (n + m) + 4
    cdef i64* key_s = <i64*>malloc(m * sizeof(i64))
    cdef i64* key_r = <i64*>malloc(n * sizeof(i64))
    cdef int* updates = <int*>malloc(n * sizeof(int))
    cdef unsigned char* queued = <unsigned char*>malloc(n)
    cdef int* queue = <int*>malloc(n * sizeof(int))
    cdef int head = 0, tail = 0, qlen = 0, u, s, v, limit = n + m + 1
    cdef i64 ku, nk, nk2, best = INF
    cdef int err = 0, err_v = 0
    for s in range(m):
        key_s[s] = INF
    for u in range(n):
        key_r[u] = INF
        updates[u] = 0
        queued[u] = 0
    try:
        key_r[src] = 0
        queue[tail] = src
        tail = (tail + 1) % n
        qlen = 1
        queued[src] = 1
        with nogil:
            while qlen > 0:
                u = queue[head]
                head = (head + 1) % n
                qlen -= 1
                queued[u] = 0
                ku = key_r[u]
                for s in range(m):
                    if not s_alive[s] or s_match[s] == u:
                        continue
                    nk = ku + a * iabs(spos[s] - rpos[u]) * H + 1
                    if nk >= key_s[s]:
                        continue
                    key_s[s] = nk
                    v = <int>s_match[s]
                    if v < 0:
                        continue
                    nk2 = nk - b * iabs(spos[s] - rpos[v]) * H + 1
                    if nk2 < key_r[v]:
                        if v == src:
                            err = 1
                            break
                        key_r[v] = nk2
                        if not queued[v]:
                            # FIFO passes bound enqueues, not relabels
                            updates[v] += 1
                            if updates[v] > limit:
                                err = 2
                                err_v = v
                                break
                            queued[v] = 1
                            queue[tail] = v
                            tail = (tail + 1) % n
                            qlen += 1
                if err:
                    break
        if err == 1:
            raise NegativeCycle("cycle back to the source request")
        if err == 2:
            raise NegativeCycle("request r%d queued too often" % err_v)
        endpoint = -1
        for s in range(m):
            if s_alive[s] and s_match[s] < 0 and key_s[s] < best:
                best = key_s[s]
        if best == INF:
            return None
        for s in range(m):
            if s_alive[s] and s_match[s] < 0 and key_s[s] == best:
                if endpoint < 0 or spos[s] < spos[endpoint] or (spos[s] == spos[endpoint] and s < endpoint):
                    endpoint = s
        path = _spfa_extract(src, endpoint, key_s, key_r, spos, rpos, s_match, r_match, a, b, H, m, n)
        reached_s = [s for s in range(m) if key_s[s] != INF]
        reached_r = [u for u in range(n) if key_r[u] != INF]
        return (best, path, reached_s, [key_s[s] for s in reached_s],
                reached_r, [key_r[u] for u in reached_r])
    finally:
        free(key_s)
        free(key_r)
        free(updates)
        free(queued)
        free(queue)


cdef list _spfa_extract(int src, int endpoint, i64* key_s, i64* key_r, const i64[:] spos,
                        const i64[:] rpos, const i64[:] s_match, const i64[:] r_match,
                        i64 a, i64 b, i64 H, int m, int n):
    cdef unsigned char* in_s = <unsigned char*>malloc(m)
    cdef int* stack = <int*>malloc(m * sizeof(int))
    cdef int sp = 0, v, u, s, nxt
    memset(in_s, 0, m)
    try:
        in_s[endpoint] = 1
        stack[sp] = endpoint
        sp += 1
        while sp > 0:
            sp -= 1
            v = stack[sp]
            for u in range(n):
                if key_r[u] == INF or s_match[v] == u or u == src:
                    continue
                if key_r[u] + a * iabs(spos[v] - rpos[u]) * H + 1 == key_s[v]:
                    s = <int>r_match[u]
                    if not in_s[s] and key_s[s] - b * iabs(spos[s] - rpos[u]) * H + 1 == key_r[u]:
                        in_s[s] = 1
                        stack[sp] = s
                        sp += 1
        path = [src]
        u = src
        while True:
            nxt = -1
            for s in range(m):
                if in_s[s] and s_match[s] != u and key_r[u] + a * iabs(spos[s] - rpos[u]) * H + 1 == key_s[s]:
                    nxt = s
                    break
            if nxt < 0:
                raise NegativeCycle("tie DAG lost the endpoint")
            path.append(nxt)
            if nxt == endpoint:
                return path
            u = <int>s_match[nxt]
            path.append(u)
    finally:
        free(in_s)
        free(stack)


def band_dp(const i64[:] S, const i64[:] R):
    cdef int n = R.shape[0]
    cdef int m = S.shape[0]
    cdef int w = m - n
    cdef int i, d
    cdef i64 use
    if w < 0:
        raise ValueError("more requests than servers")
    cdef i64* prev = <i64*>malloc((w + 1) * sizeof(i64))
    cdef i64* cur = <i64*>malloc((w + 1) * sizeof(i64))
    cdef i64* tmp
    cdef unsigned char* take = <unsigned char*>malloc(<size_t>n * (w + 1) + 1)
    try:
        for d in range(w + 1):
            prev[d] = 0
        with nogil:
            for i in range(n):
                for d in range(w + 1):
                    use = prev[d] + iabs(R[i] - S[i + d])
                    if d > 0 and cur[d - 1] <= use:
                        cur[d] = cur[d - 1]
                        take[<size_t>i * (w + 1) + d] = 0
                    else:
                        cur[d] = use
                        take[<size_t>i * (w + 1) + d] = 1
                tmp = prev
                prev = cur
                cur = tmp
        choice = [0] * n
        d = w
        for i in range(n - 1, -1, -1):
            while not take[<size_t>i * (w + 1) + d]:
                d -= 1
            choice[i] = i + d
        return (prev[w] if n else 0), choice
    finally:
        free(prev)
        free(cur)
        free(take)
