"""Pure-Python backend for the consequence-enumeration kernels.

Two kernels live here (mirrored in compiled form by ``_kernels.pyx``):

* :func:`frontier_targets` -- the deduplicating left-to-right scan.  The base
  window's cells are consumed in increasing order; after each cell the
  frontier (the values on the staircase of partially evaluated diagonals,
  clipped to the dependency cone of the target site) is canonicalized and
  branches with equal frontiers are merged.  Merging is what makes blocking
  words collapse the search instead of letting it explode with the number of
  free cells.

* :func:`naive_targets` -- the independent oracle: materializes every one of
  the ``q**free`` assignments of the base window and evolves each one.  It
  shares no machinery with the frontier scan and is deliberately kept dumb.

Both kernels work on symbol indices and a flat lookup table; dispatch over
structured automata happens one level up in :mod:`cacones.consequences`.
"""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from .errors import InfeasibleConstraint, ResourceLimit


def _suffix_forbidden(recent: tuple, forbidden: list[tuple[int, ...]]) -> bool:
    """Does some forbidden word end exactly at the last symbol of ``recent``?"""
    for f in forbidden:
        if len(f) <= len(recent) and recent[len(recent) - len(f) :] == f:
            return True
    return False


def block_graph(q: int, forbidden: list[tuple[int, ...]]):
    """Context blocks of the forbidden-word SFT and their extendability.

    Returns ``(k, left_blocks, right_blocks)`` where blocks are ``k``-tuples
    (``k = max word length - 1``) free of forbidden factors; a block is in
    ``left_blocks`` (``right_blocks``) iff it extends to a left- (right-)
    infinite valid ray, i.e. iff it is reachable from (reaches) a cycle of
    the de Bruijn-style transition graph.
    """
    from itertools import product as iproduct

    L = max(len(f) for f in forbidden)
    k = L - 1

    def clean(word: tuple[int, ...]) -> bool:
        for f in forbidden:
            nf = len(f)
            for i in range(len(word) - nf + 1):
                if word[i : i + nf] == f:
                    return False
        return True

    blocks = [w for w in iproduct(range(q), repeat=k) if clean(w)]
    index = {w: i for i, w in enumerate(blocks)}
    succ: list[list[int]] = [[] for _ in blocks]
    pred: list[list[int]] = [[] for _ in blocks]
    for w in blocks:
        for a in range(q):
            if _suffix_forbidden(w + (a,), forbidden):
                continue
            w2 = (w + (a,))[1:] if k else ()
            j = index.get(w2)
            if j is not None:
                succ[index[w]].append(j)
                pred[j].append(index[w])

    def has_infinite_walk(adj: list[list[int]]) -> set[int]:
        out = [len(a) for a in adj]
        radj: list[list[int]] = [[] for _ in blocks]
        for i, nbrs in enumerate(adj):
            for j in nbrs:
                radj[j].append(i)
        stack = [i for i, d in enumerate(out) if d == 0]
        removed = set(stack)
        while stack:
            i = stack.pop()
            for j in radj[i]:
                out[j] -= 1
                if out[j] == 0 and j not in removed:
                    removed.add(j)
                    stack.append(j)
        return {i for i in range(len(blocks)) if i not in removed}

    right_ok = has_infinite_walk(succ)
    left_ok = has_infinite_walk(pred)
    return (
        k,
        {blocks[i] for i in left_ok},
        {blocks[i] for i in right_ok},
    )


def frontier_targets(
    table: np.ndarray,
    q: int,
    r: int,
    s: int,
    u: Sequence[int],
    m: int,
    n: int,
    forbidden: Optional[list[tuple[int, ...]]] = None,
    cap: int = 2_000_000,
    stop_at: Optional[int] = None,
    track_column: bool = False,
    marked: int = -1,
    bit0: int = -1,
) -> set:
    """Exact set of values of site ``(m, n)`` over all extensions of ``u``.

    Returns a set of symbol indices, or of ``(symbol, bit)`` pairs when
    ``track_column`` is true.  The bit models a transparency layer over the
    main rule: it is ``0`` whenever column ``m`` held ``marked`` at some row
    ``1..n`` along the branch, and otherwise equals the initial bit ``bit0``
    (``-1`` meaning free, contributing both bit values).
    """
    ell = len(u)
    all_syms = tuple(range(q))

    def emit(into: set, v: int, flag: bool) -> None:
        if not track_column:
            into.add(v)
        elif flag or bit0 == 0:
            into.add((v, 0))
        elif bit0 == 1:
            into.add((v, 1))
        else:
            into.add((v, 0))
            into.add((v, 1))

    if n == 0 and not forbidden:
        base = {int(u[m])} if 0 <= m < ell else set(all_syms)
        if not track_column:
            return base
        out: set = set()
        for v in base:
            emit(out, v, False)
        return out

    if forbidden and track_column:
        raise ValueError("constraint scans do not support column tracking")

    span = s - r
    A0 = m + n * r
    B0 = m + n * s
    if forbidden:
        kctx, left_blocks, right_blocks = block_graph(q, forbidden)
        if not left_blocks:
            raise InfeasibleConstraint("forbidden words exclude every configuration")
        scan_lo = min(A0, 0)
        scan_hi = max(B0, ell - 1)
    else:
        kctx, left_blocks, right_blocks = 0, {()}, {()}
        scan_lo, scan_hi = A0, B0

    tab = table
    fired = [0] * (n + 1)
    # Live entries before the target fires: (rings, block, flag) where rings
    # is the concatenation over rows of the last `span` fired values.  After
    # the target fires (constraint scans only): (block, target_value).
    live: set = {((), blk, False) for blk in sorted(left_blocks)}
    post: set = set()
    targets: set = set()

    for c in range(scan_lo, scan_hi + 1):
        d = c - A0
        relevant = A0 <= c <= B0
        if not relevant:
            kmax = -1
        elif span == 0:
            kmax = n
        else:
            kmax = min(n, d // span)
        choices = (int(u[c]),) if 0 <= c < ell else all_syms
        target_fires = relevant and kmax == n

        offsets = []
        pos = 0
        for k in range(n + 1):
            offsets.append(pos)
            pos += min(fired[k], span)

        new_live: set = set()
        new_post: set = set()

        for blk, tv in post:
            for sym in choices:
                if _suffix_forbidden(blk + (sym,), forbidden):
                    continue
                nb = (blk + (sym,))[-kctx:] if kctx else ()
                new_post.add((nb, tv))

        for rings, blk, flag in live:
            for sym in choices:
                if forbidden:
                    if _suffix_forbidden(blk + (sym,), forbidden):
                        continue
                    nb = (blk + (sym,))[-kctx:] if kctx else ()
                else:
                    nb = ()
                if not relevant:
                    new_live.add(((), nb, flag))
                    continue
                newvals = [sym]
                nflag = flag
                for k in range(1, kmax + 1):
                    o = offsets[k - 1]
                    cnt = min(fired[k - 1], span)
                    idx = 0
                    for t in range(o, o + cnt):
                        idx = idx * q + rings[t]
                    idx = idx * q + newvals[k - 1]
                    val = int(tab[idx])
                    newvals.append(val)
                    if track_column and val == marked and c - k * s == m:
                        nflag = True
                if target_fires:
                    tv = newvals[n]
                    if forbidden:
                        new_post.add((nb, tv))
                    else:
                        emit(targets, tv, nflag)
                        if stop_at is not None and len(targets) >= stop_at:
                            return targets
                    continue
                parts = []
                for k in range(n + 1):
                    o = offsets[k]
                    cnt = min(fired[k], span)
                    vals = rings[o : o + cnt]
                    if k <= kmax:
                        vals = (vals + (newvals[k],))[-span:] if span else ()
                    parts.append(vals)
                nrings = tuple(v for part in parts for v in part)
                new_live.add((nrings, nb, nflag))

        live = new_live
        post = new_post
        if len(live) + len(post) > cap:
            raise ResourceLimit(
                f"frontier exceeded {cap} vectors at cell {c} (site m={m}, n={n})"
            )
        if relevant:
            for k in range(kmax + 1):
                fired[k] += 1

    if forbidden:
        for blk, tv in post:
            if blk in right_blocks:
                targets.add(tv)
        if not targets:
            raise InfeasibleConstraint("no valid extension of the word exists")
    return targets


def naive_targets(
    table: np.ndarray,
    q: int,
    r: int,
    s: int,
    u: Sequence[int],
    m: int,
    n: int,
    forbidden: Optional[list[tuple[int, ...]]] = None,
    chunk: int = 1 << 16,
) -> set:
    """Oracle: evolve every assignment of the base window ``[m+n*r', m+n*s']``.

    ``r' = min(r, 0)`` and ``s' = max(s, 0)``, so the window always contains
    the target column.  Kept independent of the frontier scan on purpose.
    """
    rp, sp = min(r, 0), max(s, 0)
    a, b = m + n * rp, m + n * sp
    width = b - a + 1
    ell = len(u)
    positions = np.arange(a, b + 1)
    fixed = (positions >= 0) & (positions < ell)
    fixed_vals = np.zeros(width, dtype=np.int32)
    fixed_vals[fixed] = np.asarray(u, dtype=np.int32)[positions[fixed]]
    free_pos = np.nonzero(~fixed)[0]
    nfree = len(free_pos)

    if forbidden:
        kctx, left_blocks, right_blocks = block_graph(q, forbidden)
        flist = forbidden
    else:
        kctx, left_blocks, right_blocks = 0, {()}, {()}
        flist = []

    w = s - r + 1
    out: set = set()
    total = q**nfree
    tab = table
    for start in range(0, total, chunk):
        count = min(chunk, total - start)
        rows = np.tile(fixed_vals, (count, 1))
        if nfree:
            idx = np.arange(start, start + count, dtype=np.int64)
            for j in range(nfree - 1, -1, -1):
                rows[:, free_pos[j]] = (idx % q).astype(np.int32)
                idx //= q
        if flist:
            keep = np.ones(count, dtype=bool)
            ext_lo = positions[0]
            ext_hi = positions[-1]
            for f in flist:
                nf = len(f)
                farr = np.array(f, dtype=np.int32)
                for i in range(width - nf + 1):
                    keep &= ~(rows[:, i : i + nf] == farr).all(axis=1)
            # edge contexts must extend to infinite valid rays
            if kctx:
                lb = {blk for blk in left_blocks}
                rb = {blk for blk in right_blocks}
                if width >= kctx:
                    keep &= np.array(
                        [tuple(row[:kctx]) in lb for row in rows], dtype=bool
                    )
                    keep &= np.array(
                        [tuple(row[-kctx:]) in rb for row in rows], dtype=bool
                    )
            rows = rows[keep]
            if rows.shape[0] == 0:
                continue
        lo, hi = a, b
        cur = rows
        for k in range(n):
            windows = np.lib.stride_tricks.sliding_window_view(cur, w, axis=1)
            idx = windows[..., 0].astype(np.int64)
            for t in range(1, w):
                idx = idx * q + windows[..., t]
            nxt = tab[idx.reshape(-1)].reshape(idx.shape).astype(np.int32)
            # row k+1 spans [lo - r, hi - s]
            lo, hi = lo - r, hi - s
            cur = nxt
        col = m - lo
        out.update(int(v) for v in np.unique(cur[:, col]))
        if not flist and len(out) == q:
            break
    if forbidden and not out:
        raise InfeasibleConstraint("no valid extension of the word exists")
    return out
