"""Exact per-row reachable languages as leveled, minimized DFAs.

For a word ``u`` and horizon ``T``, the set of restrictions of ``F^n(x)`` to
the joint dependency interval (over all ``x`` in ``[u]_0``) is a regular
language of fixed-length words.  This module maintains it as a leveled DFA:
one level per cell, transitions labeled by symbols, minimized after every
application of the local rule.  Minimization merges exactly the prefixes
with equal suffix languages -- the equivalences a per-site frontier scan
cannot see -- which keeps blocking-word analyses tractable where per-site
enumeration explodes.

The per-position letter sets of the row language are exactly the possible
site values, so cones and blocking bands read off directly.  Results are
cross-validated against the per-site engine and the brute-force oracle in
the test suite.

Levels are dense transition matrices ``(num_states, q)`` with ``-1`` for
absent edges; every state of a built language is reachable and productive.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import CellularAutomaton
from .errors import ResourceLimit


@dataclass
class RowLanguage:
    """Leveled DFA over the cells ``[lo, lo + width)`` of one row."""

    lo: int
    width: int
    levels: list[np.ndarray]  # levels[i]: (k_i, q) int32, -1 = no edge

    def positions(self) -> range:
        return range(self.lo, self.lo + self.width)

    def size(self) -> int:
        return sum(lv.shape[0] for lv in self.levels)

    def letter_sets(self) -> dict[int, frozenset[int]]:
        """Exact set of letters occurring at each position over the language."""
        out = {}
        for i, lv in enumerate(self.levels):
            present = np.nonzero((lv >= 0).any(axis=0))[0]
            out[self.lo + i] = frozenset(int(v) for v in present)
        return out


def _minimize(lo: int, width: int, levels: list[np.ndarray]) -> RowLanguage:
    """Backward leveled minimization, then forward reachability prune.

    Since each state's signature is its transition row with successors
    replaced by their classes, the unique signature rows double as the
    merged levels' transition matrices; class numbering is lexicographic
    in the signatures, which keeps the construction deterministic.
    """
    nstates_acc = int(levels[-1].max()) + 1 if width else 1
    class_next = np.zeros(nstates_acc, dtype=np.int64)
    merged: list[np.ndarray] = [None] * width
    for i in range(width - 1, -1, -1):
        lv = levels[i]
        sig = np.where(lv >= 0, class_next[np.clip(lv, 0, None)], -1)
        uniq, inv = np.unique(sig, axis=0, return_inverse=True)
        merged[i] = uniq.astype(np.int32)
        class_next = inv

    pruned: list[np.ndarray] = []
    cur = np.unique(class_next)  # classes of the (single) start state
    if cur.size != 1:
        raise AssertionError("row language must have a single start class")
    for i in range(width):
        lv = merged[i][cur]
        nxt = np.unique(lv[lv >= 0])
        if nxt.size == 0:
            raise AssertionError("row language lost all states")
        renum = np.full(int(nxt.max()) + 1, -1, dtype=np.int64)
        renum[nxt] = np.arange(nxt.size)
        out = np.where(lv >= 0, renum[np.clip(lv, 0, None)], -1).astype(np.int32)
        pruned.append(out)
        cur = nxt
    return RowLanguage(lo, width, pruned)


def initial_language(
    q: int, u, lo: int, width: int, fixed_offset: int = 0
) -> RowLanguage:
    """Language ``free* u free*`` over ``[lo, lo+width)``; ``u`` sits at 0."""
    uw = [int(v) for v in u]
    levels = []
    for i in range(width):
        pos = lo + i
        row = np.full((1, q), -1, dtype=np.int32)
        if 0 <= pos - fixed_offset < len(uw):
            row[0, uw[pos - fixed_offset]] = 0
        else:
            row[0, :] = 0
        levels.append(row)
    return _minimize(lo, width, levels)


def advance(
    lang: RowLanguage,
    ca: CellularAutomaton,
    state_cap: int = 4_000_000,
) -> RowLanguage:
    """Image of the row language under one application of the local rule.

    Level-synchronized subset construction over (state, window-buffer)
    pairs, followed by leveled minimization.  The new row covers
    ``[lo - r, lo - r + width - (s - r))``.
    """
    r, s = ca.neighborhood.r, ca.neighborhood.s
    w = s - r + 1
    q = ca.q
    table = ca.table_array()
    width2 = lang.width - (w - 1)
    if width2 <= 0:
        raise ResourceLimit("row language narrower than the rule window")
    qpow = q ** (w - 1)
    syms = np.arange(q, dtype=np.int64)

    # items of the start set: codes st * qpow + buf after w-1 input cells
    items = np.zeros(1, dtype=np.int64)  # (st=0, buf=0)
    for i in range(w - 1):
        st = items // qpow
        buf = items % qpow
        lv = lang.levels[i]
        dst = lv[st]  # (N, q)
        valid = dst >= 0
        nbuf = buf[:, None] * q + syms[None, :]
        codes = dst.astype(np.int64) * qpow + nbuf
        items = np.unique(codes[valid])

    # DFA states are canonical sorted item arrays, stored flat; a state is
    # the slice flat[bounds[i]:bounds[i+1]], identified by its raw bytes.
    flat = items
    bounds = np.array([0, items.size], dtype=np.int64)
    total = 1
    out_levels: list[np.ndarray] = []
    for j in range(width2):
        lv = lang.levels[j + w - 1]
        nstates = bounds.size - 1
        sizes = np.diff(bounds)
        owners = np.repeat(np.arange(nstates, dtype=np.int64), sizes)
        st = flat // qpow
        buf = flat % qpow
        dst = lv[st].astype(np.int64)  # (N, q)
        valid = dst >= 0
        win = buf[:, None] * q + syms[None, :]
        outs = table[win].astype(np.int64)  # (N, q)
        codes = dst * qpow + win % qpow
        own_m = np.broadcast_to(owners[:, None], outs.shape)

        f_own = own_m[valid]
        f_out = outs[valid]
        f_code = codes[valid]
        order = np.lexsort((f_code, f_out, f_own))
        f_own, f_out, f_code = f_own[order], f_out[order], f_code[order]
        # drop duplicate codes within one (owner, out) group
        if f_own.size:
            keep = np.ones(f_own.size, dtype=bool)
            keep[1:] = (
                (f_own[1:] != f_own[:-1])
                | (f_out[1:] != f_out[:-1])
                | (f_code[1:] != f_code[:-1])
            )
            f_own, f_out, f_code = f_own[keep], f_out[keep], f_code[keep]
        grp = np.ones(f_own.size, dtype=bool)
        grp[1:] = (f_own[1:] != f_own[:-1]) | (f_out[1:] != f_out[:-1])
        starts = np.nonzero(grp)[0]
        ends = np.append(starts[1:], f_own.size)

        trans = np.full((nstates, q), -1, dtype=np.int32)
        index: dict[bytes, int] = {}
        keep_slices: list[tuple[int, int]] = []
        raw = f_code.tobytes()
        owners_at = f_own[starts] if starts.size else f_own[:0]
        outs_at = f_out[starts] if starts.size else f_out[:0]
        for gi in range(starts.size):
            a = int(starts[gi])
            b = int(ends[gi])
            key = raw[a * 8 : b * 8]
            si = index.get(key)
            if si is None:
                si = len(keep_slices)
                index[key] = si
                keep_slices.append((a, b))
            trans[owners_at[gi], outs_at[gi]] = si
        total += len(keep_slices)
        if total > state_cap:
            raise ResourceLimit(
                f"row-language determinization exceeded {state_cap} states"
            )
        out_levels.append(trans)
        if keep_slices:
            nsizes = np.array([b - a for a, b in keep_slices], dtype=np.int64)
            gather = np.concatenate(
                [np.arange(a, b, dtype=np.int64) for a, b in keep_slices]
            )
            flat = f_code[gather]
            bounds = np.concatenate(([0], np.cumsum(nsizes)))
        else:
            flat = f_code[:0]
            bounds = np.array([0], dtype=np.int64)
    return _minimize(lang.lo - r, width2, out_levels)


class RowAnalyzer:
    """Incrementally maintained row languages for one word up to a horizon.

    ``letters(n)`` returns the exact per-position value sets of row ``n``
    on the joint dependency window chosen at construction (which contains
    the outer syntactic cone of every row up to the horizon).
    """

    def __init__(
        self,
        ca: CellularAutomaton,
        u,
        T: int,
        state_cap: int = 4_000_000,
    ):
        self.ca = ca
        self.T = T
        self.state_cap = state_cap
        uw = [int(v) for v in u]
        r, s = ca.neighborhood.r, ca.neighborhood.s
        lo0 = -T * s + T * r
        hi0 = len(uw) - 1 - T * r + T * s
        self._langs: list[RowLanguage] = [
            initial_language(ca.q, uw, lo0, hi0 - lo0 + 1)
        ]
        self._letters: list[dict[int, frozenset[int]]] = [
            self._langs[0].letter_sets()
        ]

    def language(self, n: int) -> RowLanguage:
        while len(self._langs) <= n:
            self._langs.append(
                advance(self._langs[-1], self.ca, self.state_cap)
            )
            self._letters.append(self._langs[-1].letter_sets())
        return self._langs[n]

    def letters(self, n: int) -> dict[int, frozenset[int]]:
        self.language(n)
        return self._letters[n]

    def values(self, m: int, n: int) -> frozenset[int]:
        return self.letters(n)[m]

    def max_states(self) -> int:
        return max(lang.size() for lang in self._langs)
