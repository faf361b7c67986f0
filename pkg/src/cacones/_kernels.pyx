# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: frontier-deduplicating scan and brute-force oracle.

Mirrors ``_engine_py`` exactly; the pure module remains the reference and
handles the cases this one delegates (forbidden-word constraints, alphabets
wider than 250 symbols).
"""

from libc.stdlib cimport free, malloc, realloc
from libc.string cimport memcmp, memcpy, memset

import numpy as np

cimport numpy as cnp

from . import _engine_py
from .errors import ResourceLimit


cdef inline unsigned long long _fnv(unsigned char* data, int n) nogil:
    cdef unsigned long long h = 1469598103934665603ULL
    cdef int i
    for i in range(n):
        h ^= data[i]
        h *= 1099511628211ULL
    return h


cdef struct VecSet:
    unsigned char* rows      # count * veclen bytes
    long long* slots         # capacity, row index + 1 or 0
    long long count
    long long row_capacity
    long long slot_capacity  # power of two
    int veclen


cdef int _vs_init(VecSet* vs, int veclen, long long rows_hint) except -1:
    vs.veclen = veclen
    vs.count = 0
    vs.row_capacity = rows_hint if rows_hint > 16 else 16
    cdef long long sc = 64
    while sc < vs.row_capacity * 2:
        sc <<= 1
    vs.slot_capacity = sc
    vs.rows = <unsigned char*> malloc(vs.row_capacity * (veclen if veclen else 1))
    vs.slots = <long long*> malloc(sc * sizeof(long long))
    if vs.rows == NULL or vs.slots == NULL:
        raise MemoryError()
    memset(vs.slots, 0, sc * sizeof(long long))
    return 0


cdef void _vs_free(VecSet* vs) noexcept:
    if vs.rows != NULL:
        free(vs.rows)
        vs.rows = NULL
    if vs.slots != NULL:
        free(vs.slots)
        vs.slots = NULL


cdef int _vs_grow_slots(VecSet* vs) except -1:
    cdef long long newcap = vs.slot_capacity << 1
    cdef long long* slots = <long long*> malloc(newcap * sizeof(long long))
    if slots == NULL:
        raise MemoryError()
    memset(slots, 0, newcap * sizeof(long long))
    cdef long long i, j, mask = newcap - 1
    cdef unsigned long long h
    cdef int vl = vs.veclen
    for i in range(vs.count):
        h = _fnv(vs.rows + i * vl, vl)
        j = h & mask
        while slots[j] != 0:
            j = (j + 1) & mask
        slots[j] = i + 1
    free(vs.slots)
    vs.slots = slots
    vs.slot_capacity = newcap
    return 0


cdef long long _vs_insert(VecSet* vs, unsigned char* vec) except -2:
    """Insert; returns the row index if new, -1 if already present."""
    cdef int vl = vs.veclen
    cdef unsigned long long h = _fnv(vec, vl)
    cdef long long mask = vs.slot_capacity - 1
    cdef long long j = h & mask
    cdef long long ridx
    while True:
        ridx = vs.slots[j]
        if ridx == 0:
            break
        if memcmp(vs.rows + (ridx - 1) * vl, vec, vl) == 0:
            return -1
        j = (j + 1) & mask
    if vs.count >= vs.row_capacity:
        vs.row_capacity <<= 1
        vs.rows = <unsigned char*> realloc(
            vs.rows, vs.row_capacity * (vl if vl else 1)
        )
        if vs.rows == NULL:
            raise MemoryError()
    if vl:
        memcpy(vs.rows + vs.count * vl, vec, vl)
    vs.slots[j] = vs.count + 1
    vs.count += 1
    if vs.count * 2 > vs.slot_capacity:
        _vs_grow_slots(vs)
    return vs.count - 1


def frontier_targets(
    table,
    int q,
    int r,
    int s,
    u,
    long long m,
    long long n,
    forbidden=None,
    long long cap=2_000_000,
    stop_at=None,
    bint track_column=False,
    int marked=-1,
    int bit0=-1,
):
    """See ``_engine_py.frontier_targets``; constraint scans are delegated."""
    if forbidden:
        return _engine_py.frontier_targets(
            table, q, r, s, u, m, n, forbidden, cap, stop_at,
            track_column, marked, bit0,
        )
    if q > 250:
        return _engine_py.frontier_targets(
            table, q, r, s, u, m, n, None, cap, stop_at,
            track_column, marked, bit0,
        )

    cdef cnp.ndarray[cnp.int32_t, ndim=1] tab = np.ascontiguousarray(
        table, dtype=np.int32
    )
    cdef cnp.ndarray[cnp.int32_t, ndim=1] uw = np.ascontiguousarray(
        u, dtype=np.int32
    )
    cdef long long ell = uw.shape[0]
    cdef int istop = 0 if stop_at is None else int(stop_at)

    out = set()
    cdef int v, b
    if n == 0:
        if 0 <= m < ell:
            vals = [int(uw[m])]
        else:
            vals = list(range(q))
        for v in vals:
            if not track_column:
                out.add(v)
            elif bit0 == 0:
                out.add((v, 0))
            elif bit0 == 1:
                out.add((v, 1))
            else:
                out.add((v, 0))
                out.add((v, 1))
        return out

    cdef int span = s - r
    cdef long long A0 = m + n * r
    cdef long long B0 = m + n * s
    cdef int nrows = <int> n + 1
    cdef int maxlen = nrows * span + (1 if track_column else 0)
    if maxlen == 0:
        maxlen = 1

    cdef int* fired = <int*> malloc(nrows * sizeof(int))
    cdef int* offs = <int*> malloc(nrows * sizeof(int))
    cdef int* newvals = <int*> malloc(nrows * sizeof(int))
    cdef unsigned char* tmp = <unsigned char*> malloc(maxlen)
    cdef unsigned char* seen = <unsigned char*> malloc(2 * q)
    if fired == NULL or offs == NULL or newvals == NULL or tmp == NULL or seen == NULL:
        raise MemoryError()
    memset(fired, 0, nrows * sizeof(int))
    memset(seen, 0, 2 * q)

    cdef VecSet cur, nxt
    _vs_init(&cur, 0 if not track_column else 1, 16)
    # seed: empty rings (+ flag byte 0)
    tmp[0] = 0
    _vs_insert(&cur, tmp)

    cdef long long c, i, d
    cdef int kmax, k, t, cnt, o, veclen_old, veclen_new, flagpos_old, flagpos_new
    cdef int sym, sym_lo, sym_hi, val
    cdef long long idx
    cdef int nseen = 0
    cdef bint target_fires, fired_any
    cdef unsigned char flag
    cdef unsigned char* vec

    try:
        for c in range(A0, B0 + 1):
            d = c - A0
            if span == 0:
                kmax = <int> n
            else:
                kmax = <int> (d // span)
                if kmax > n:
                    kmax = <int> n
            if 0 <= c < ell:
                sym_lo = uw[c]
                sym_hi = sym_lo + 1
            else:
                sym_lo = 0
                sym_hi = q
            target_fires = kmax == <int> n

            veclen_old = 0
            for k in range(nrows):
                offs[k] = veclen_old
                cnt = fired[k]
                if cnt > span:
                    cnt = span
                veclen_old += cnt
            flagpos_old = veclen_old
            veclen_new = 0
            for k in range(nrows):
                cnt = fired[k] + (1 if k <= kmax else 0)
                if cnt > span:
                    cnt = span
                veclen_new += cnt
            flagpos_new = veclen_new

            if not target_fires:
                _vs_init(
                    &nxt,
                    veclen_new + (1 if track_column else 0),
                    cur.count * 2,
                )

            for i in range(cur.count):
                vec = cur.rows + i * cur.veclen
                for sym in range(sym_lo, sym_hi):
                    flag = vec[flagpos_old] if track_column else 0
                    newvals[0] = sym
                    for k in range(1, kmax + 1):
                        o = offs[k - 1]
                        cnt = fired[k - 1]
                        if cnt > span:
                            cnt = span
                        idx = 0
                        for t in range(o, o + cnt):
                            idx = idx * q + vec[t]
                        idx = idx * q + newvals[k - 1]
                        val = tab[idx]
                        newvals[k] = val
                        if track_column and val == marked and c - k * s == m:
                            flag = 1
                    if target_fires:
                        val = newvals[n]
                        if not track_column:
                            if not seen[val]:
                                seen[val] = 1
                                nseen += 1
                                out.add(val)
                        else:
                            if flag or bit0 == 0:
                                if not seen[2 * val]:
                                    seen[2 * val] = 1
                                    nseen += 1
                                    out.add((val, 0))
                            elif bit0 == 1:
                                if not seen[2 * val + 1]:
                                    seen[2 * val + 1] = 1
                                    nseen += 1
                                    out.add((val, 1))
                            else:
                                if not seen[2 * val]:
                                    seen[2 * val] = 1
                                    nseen += 1
                                    out.add((val, 0))
                                if not seen[2 * val + 1]:
                                    seen[2 * val + 1] = 1
                                    nseen += 1
                                    out.add((val, 1))
                        if istop and nseen >= istop:
                            return out
                        continue
                    # rebuild rings into tmp
                    o = 0
                    for k in range(nrows):
                        cnt = fired[k]
                        if cnt > span:
                            cnt = span
                        if k <= kmax:
                            if cnt == span and span > 0:
                                for t in range(1, cnt):
                                    tmp[o + t - 1] = vec[offs[k] + t]
                                tmp[o + cnt - 1] = <unsigned char> newvals[k]
                                o += cnt
                            else:
                                for t in range(cnt):
                                    tmp[o + t] = vec[offs[k] + t]
                                if span > 0:
                                    tmp[o + cnt] = <unsigned char> newvals[k]
                                    o += cnt + 1
                        else:
                            for t in range(cnt):
                                tmp[o + t] = vec[offs[k] + t]
                            o += cnt
                    if track_column:
                        tmp[flagpos_new] = flag
                    _vs_insert(&nxt, tmp)
                    if nxt.count > cap:
                        _vs_free(&nxt)
                        raise ResourceLimit(
                            f"frontier exceeded {cap} vectors at cell {c} "
                            f"(site m={m}, n={n})"
                        )
            if target_fires:
                break
            _vs_free(&cur)
            cur = nxt
            nxt.rows = NULL
            nxt.slots = NULL
            for k in range(kmax + 1):
                fired[k] += 1
        return out
    finally:
        _vs_free(&cur)
        free(fired)
        free(offs)
        free(newvals)
        free(tmp)
        free(seen)


def naive_targets(
    table,
    int q,
    int r,
    int s,
    u,
    long long m,
    long long n,
    forbidden=None,
    chunk=None,
):
    """See ``_engine_py.naive_targets``; constrained cases are delegated."""
    if forbidden:
        return _engine_py.naive_targets(table, q, r, s, u, m, n, forbidden)

    cdef cnp.ndarray[cnp.int32_t, ndim=1] tab = np.ascontiguousarray(
        table, dtype=np.int32
    )
    cdef cnp.ndarray[cnp.int32_t, ndim=1] uw = np.ascontiguousarray(
        u, dtype=np.int32
    )
    cdef long long ell = uw.shape[0]
    cdef int rp = r if r < 0 else 0
    cdef int sp = s if s > 0 else 0
    cdef long long a = m + n * rp
    cdef long long b = m + n * sp
    cdef int width = <int> (b - a + 1)
    cdef int w = s - r + 1
    cdef int i, j, k, nfree = 0
    cdef long long pos

    cdef int* base = <int*> malloc(width * sizeof(int))
    cdef int* freepos = <int*> malloc(width * sizeof(int))
    cdef int* row0 = <int*> malloc(width * sizeof(int))
    cdef int* row1 = <int*> malloc(width * sizeof(int))
    cdef unsigned char* seen = <unsigned char*> malloc(q)
    cdef int* odo = <int*> malloc((width + 1) * sizeof(int))
    if (base == NULL or freepos == NULL or row0 == NULL or row1 == NULL
            or seen == NULL or odo == NULL):
        raise MemoryError()
    memset(seen, 0, q)

    for i in range(width):
        pos = a + i
        if 0 <= pos < ell:
            base[i] = uw[pos]
        else:
            base[i] = 0
            freepos[nfree] = i
            nfree += 1
    memset(odo, 0, (width + 1) * sizeof(int))

    cdef int nseen = 0
    cdef long long col, lo
    cdef int cur_len, nxt_len
    cdef long long idx
    cdef bint done = nfree == 0
    cdef int* cur
    cdef int* nxt
    cdef int* swap

    out = set()
    try:
        while True:
            # evolve this assignment
            memcpy(row0, base, width * sizeof(int))
            cur = row0
            nxt = row1
            cur_len = width
            lo = a
            for k in range(<int> n):
                nxt_len = cur_len - (s - r)
                for j in range(nxt_len):
                    idx = 0
                    for i in range(w):
                        idx = idx * q + cur[j + i]
                    nxt[j] = tab[idx]
                lo = lo - r
                swap = cur
                cur = nxt
                nxt = swap
                cur_len = nxt_len
            col = m - lo
            if not seen[cur[col]]:
                seen[cur[col]] = 1
                nseen += 1
                out.add(cur[col])
                if nseen == q:
                    break
            if done:
                break
            # odometer over the free cells
            j = 0
            while j < nfree:
                base[freepos[j]] += 1
                if base[freepos[j]] < q:
                    break
                base[freepos[j]] = 0
                j += 1
            if j == nfree:
                break
        return out
    finally:
        free(base)
        free(freepos)
        free(row0)
        free(row1)
        free(seen)
        free(odo)
