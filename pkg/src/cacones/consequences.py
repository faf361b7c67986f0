"""Cones of consequences, blocking words along curves, slope intervals.

The central primitive is :func:`possible_states`: the exact set of values a
space-time site can take over all extensions of a word (optionally inside a
forbidden-word subshift).  Everything else -- cones, blocking certificates,
slope estimates -- is assembled from it.

Structured automata are dispatched to cheaper exact computations: cartesian
products factor componentwise, and a transparency layer reduces to its base
rule plus a per-branch "column was marked" flag.  Both reductions are exact;
the generic frontier scan remains the fallback.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import numpy as np

from . import engine
from .core import CellularAutomaton, Configuration, evolve
from .curves import Curve, linear_curve
from .errors import (
    CaconesError,
    InfeasibleConstraint,
    NoBlockingSlope,
    ResourceLimit,
    WidthTooSmall,
)

DEFAULT_FRONTIER_CAP = int(os.environ.get("CACONES_FRONTIER_CAP", 2_000_000))
DEFAULT_ROW_STATE_CAP = int(os.environ.get("CACONES_ROW_STATE_CAP", 4_000_000))
PROBE_SEED = 20260810


class _ProbeSet:
    """A few explicit extensions of the word, evolved once to the horizon.

    Two probes disagreeing at a site are a concrete witness that the site
    is not a consequence; agreement proves nothing.  Probes are uniform
    paddings with every symbol plus a few seeded random paddings, so the
    verdicts are deterministic.
    """

    def __init__(self, ca, uw, T, n_random=8):
        import random

        self.T = T
        r, s = ca.neighborhood.r, ca.neighborhood.s
        reach = T * max(abs(r), abs(s), 1) + 2
        rng = random.Random(PROBE_SEED)
        words = []
        q = ca.q
        base = [int(v) for v in uw]
        for sym in range(q):
            words.append(([], base, sym))
        for _ in range(n_random):
            left = [rng.randrange(q) for _ in range(reach)]
            right = [rng.randrange(q) for _ in range(reach)]
            words.append((left, base + right, 0))
        self.diagrams = []
        for left, rest, bg in words:
            word = np.array(left + rest, dtype=np.int32)
            cfg = Configuration(
                ca.alphabet, "finite", word, background=bg, offset=-len(left)
            )
            self.diagrams.append(evolve(ca, cfg, T))

    def values(self, m, n):
        return {d.rows[n].value_at(m) for d in self.diagrams}


def syntactic_bounds(
    ca: CellularAutomaton, word_length: int, n: int
) -> tuple[Optional[tuple[int, int]], tuple[int, int]]:
    """Inner and outer dependency intervals of a length-``l`` word at time ``n``.

    ``inner`` is the set of cells whose whole dependency window lies inside
    the word (``None`` when empty); ``outer`` is the set of cells whose
    window meets the word.  Everything inside ``inner`` is a consequence,
    nothing outside ``outer`` can be.
    """
    if word_length < 1 or n < 0:
        raise CaconesError("need word_length >= 1 and n >= 0")
    r, s = ca.neighborhood.r, ca.neighborhood.s
    inner = (-n * r, word_length - 1 - n * s)
    outer = (-n * s, word_length - 1 - n * r)
    return (inner if inner[0] <= inner[1] else None), outer


def _word_indices(ca: CellularAutomaton, u) -> np.ndarray:
    if isinstance(u, np.ndarray):
        return u.astype(np.int32)
    if len(u) and isinstance(u[0], (int, np.integer)):
        return np.array(u, dtype=np.int32)
    return ca.alphabet.word_indices(u)


def _forbidden_indices(ca: CellularAutomaton, constraint) -> Optional[list]:
    if not constraint:
        return None
    out = []
    for word in constraint:
        out.append(tuple(int(v) for v in _word_indices(ca, word)))
    return out


def possible_states(
    ca: CellularAutomaton,
    u,
    m: int,
    n: int,
    constraint=None,
    cap: int = DEFAULT_FRONTIER_CAP,
    stop_at: Optional[int] = None,
) -> frozenset[int]:
    """Exact set ``{F^n(x)[m] : x in [u]_0, x avoids the forbidden words}``.

    ``stop_at`` truncates the answer once that many distinct values are
    found; a truncated set is still a sound witness of non-determinacy.
    """
    if n < 0:
        raise CaconesError("time index must be nonnegative")
    uw = _word_indices(ca, u)
    forb = _forbidden_indices(ca, constraint)
    if forb is not None:
        _validate_word_against(ca, uw, forb)
    return frozenset(_dispatch(ca, uw, m, n, forb, cap, stop_at))


def _validate_word_against(ca, uw, forb):
    ut = tuple(int(v) for v in uw)
    for f in forb:
        nf = len(f)
        for i in range(len(ut) - nf + 1):
            if ut[i : i + nf] == f:
                raise InfeasibleConstraint(
                    "the word itself contains a forbidden factor"
                )


def _dispatch(ca, uw, m, n, forb, cap, stop_at) -> set:
    structure = ca.structure
    if structure is not None and forb is None:
        kind = structure[0]
        if kind == "product":
            ca1, ca2 = structure[1], structure[2]
            q2 = ca2.q
            s1 = _dispatch(ca1, uw // q2, m, n, None, cap, stop_at)
            s2 = _dispatch(ca2, uw % q2, m, n, None, cap, stop_at)
            out = {v1 * q2 + v2 for v1 in s1 for v2 in s2}
            if stop_at is not None and len(out) > stop_at:
                out = set(list(sorted(out))[:stop_at])
            return out
        if kind == "transparency":
            base, marked = structure[1], structure[2]
            rb, sb = base.neighborhood.r, base.neighborhood.s
            if rb <= 0 <= sb and base.structure is None:
                bit0 = int(uw[m]) % 2 if 0 <= m < len(uw) else -1
                pairs = engine.frontier_targets(
                    base.table_array(),
                    base.q,
                    rb,
                    sb,
                    (uw // 2).astype(np.int32),
                    m,
                    n,
                    None,
                    cap,
                    stop_at,
                    True,
                    marked,
                    bit0,
                )
                return {v * 2 + b for v, b in pairs}
    return set(
        engine.frontier_targets(
            ca.table_array(),
            ca.q,
            ca.neighborhood.r,
            ca.neighborhood.s,
            uw,
            m,
            n,
            forb,
            cap,
            stop_at,
        )
    )


def naive_possible_states(
    ca: CellularAutomaton, u, m: int, n: int, constraint=None
) -> frozenset[int]:
    """Brute-force oracle over the base window (independent of the scan)."""
    uw = _word_indices(ca, u)
    forb = _forbidden_indices(ca, constraint)
    if forb is not None:
        _validate_word_against(ca, uw, forb)
    return frozenset(
        engine.naive_targets(
            ca.table_array(),
            ca.q,
            ca.neighborhood.r,
            ca.neighborhood.s,
            uw,
            m,
            n,
            forb,
        )
    )


@dataclass
class ConsequenceCone:
    """Per-site verdicts inside the outer syntactic cone of a word.

    ``rows[n]`` maps each cell of the outer interval at time ``n`` to
    ``("det", symbol)`` or ``("free", values)``; free value sets are exact
    unless ``determined_only`` was requested, in which case they are
    truncated witnesses of size >= 2.
    """

    word: tuple[str, ...]
    automaton_name: str
    horizon: int
    rows: list[dict]
    exact_free_sets: bool
    translation_triggers: list[int] = field(default_factory=list)
    translation_violations: list[int] = field(default_factory=list)

    def determined(self, n: int) -> dict[int, int]:
        return {m: v[1] for m, v in self.rows[n].items() if v[0] == "det"}

    def determined_sites(self) -> set[tuple[int, int]]:
        return {
            (m, n)
            for n in range(self.horizon + 1)
            for m, v in self.rows[n].items()
            if v[0] == "det"
        }

    def determined_with(self, symbol_index: int) -> set[tuple[int, int]]:
        return {
            (m, n)
            for n in range(self.horizon + 1)
            for m, v in self.rows[n].items()
            if v == ("det", symbol_index)
        }


def _translation_check(rows, ell):
    """Flag rows where determined sites sit exactly ``2*ell`` apart.

    Two occurrences of the word ``2*ell`` cells apart are always compatible,
    so such a pair forces every determined site of the row to one common
    symbol; a row violating that is an engine bug, not a property of the
    rule.
    """
    triggers, violations = [], []
    for n, row in enumerate(rows):
        det = {m: v[1] for m, v in row.items() if v[0] == "det"}
        if any(m + 2 * ell in det for m in det):
            triggers.append(n)
            if len(set(det.values())) > 1:
                violations.append(n)
    return triggers, violations


def _row_letter_maps(ca, uw, T, state_cap):
    """Exact per-site value sets for all rows, via the row-language engine.

    For a transparency-layered automaton this analyzes the base layer and
    lifts the verdicts: a site is a determined pair iff its main value is
    forced and the bit is derivable (forced 0 by the marked symbol, pinned
    by the word, or shown free by a bit-flip witness on the base diagram).
    Sites the lifting cannot settle fall back to the per-site flag scan.
    """
    from .rowlang import RowAnalyzer

    structure = ca.structure
    if structure is not None and structure[0] == "transparency":
        base, marked = structure[1], structure[2]
        if base.structure is None and base.neighborhood.r <= 0 <= base.neighborhood.s:
            main_u = (uw // 2).astype(np.int32)
            bits_u = (uw % 2).astype(np.int32)
            ra = RowAnalyzer(base, main_u, T, state_cap)
            lone = evolve(
                base,
                Configuration(
                    base.alphabet, "finite", main_u, background=0, offset=0
                ),
                T,
            )
            def flag_scan(m, n):
                pairs = engine.frontier_targets(
                    base.table_array(),
                    base.q,
                    base.neighborhood.r,
                    base.neighborhood.s,
                    main_u,
                    m,
                    n,
                    None,
                    DEFAULT_FRONTIER_CAP,
                    None,
                    True,
                    marked,
                    int(bits_u[m]) if 0 <= m < len(uw) else -1,
                )
                return frozenset(v2 * 2 + b for v2, b in pairs)

            def lift(n):
                letters = ra.letters(n)
                out = {}
                for m, vals in letters.items():
                    in_u = 0 <= m < len(uw)
                    bit_fixed0 = in_u and int(bits_u[m]) == 0
                    if len(vals) > 1:
                        if in_u and int(bits_u[m]) == 1:
                            out[m] = flag_scan(m, n)
                        else:
                            # every reachable main value is realizable with
                            # bit 0, so these are honest free witnesses
                            out[m] = frozenset(v * 2 for v in vals)
                        continue
                    v = next(iter(vals))
                    if v == marked or bit_fixed0:
                        out[m] = frozenset({v * 2})
                        continue
                    lone_hits = any(
                        lone.rows[k].value_at(m) == marked
                        for k in range(1, n + 1)
                    )
                    if not lone_hits and not in_u:
                        # bit-flip witness: same main evolution, bit survives
                        out[m] = frozenset({v * 2, v * 2 + 1})
                        continue
                    out[m] = flag_scan(m, n)
                return out

            return lift, False
    ra = RowAnalyzer(ca, uw, T, state_cap)
    return ra.letters, True


def consequence_cone(
    ca: CellularAutomaton,
    u,
    T: int,
    constraint=None,
    cap: int = DEFAULT_FRONTIER_CAP,
    workers: int = 1,
    determined_only: bool = False,
    cone_engine: str = "auto",
    row_state_cap: int = DEFAULT_ROW_STATE_CAP,
) -> ConsequenceCone:
    """All site verdicts for ``0 <= n <= T`` inside the outer cone.

    ``cone_engine``: ``"rows"`` uses the row-language engine (exact value
    sets, no constraint support), ``"site"`` runs the per-site frontier
    scan for every site (with two-witness probe shortcuts when
    ``determined_only`` is set), ``"auto"`` picks ``rows`` when legal.
    """
    if T < 0:
        raise CaconesError("horizon must be nonnegative")
    uw = _word_indices(ca, u)
    forb = _forbidden_indices(ca, constraint)
    if forb is not None:
        _validate_word_against(ca, uw, forb)
    ell = len(uw)
    q = ca.q

    if cone_engine == "auto":
        cone_engine = "site" if forb is not None else "rows"
    if cone_engine == "rows" and forb is not None:
        raise CaconesError("row engine does not support constraints")

    rows: list[dict] = [dict() for _ in range(T + 1)]
    exact = True

    if cone_engine == "rows":
        letters_fn, exact = _row_letter_maps(ca, uw, T, row_state_cap)
        for n in range(T + 1):
            letters = letters_fn(n)
            _, (lo, hi) = syntactic_bounds(ca, ell, n)
            for m in range(lo, hi + 1):
                vals = letters[m]
                if len(vals) == 1:
                    rows[n][m] = ("det", next(iter(vals)))
                else:
                    rows[n][m] = ("free", frozenset(vals))
    else:
        stop_at = 2 if determined_only else None
        exact = not determined_only
        probes = (
            _ProbeSet(ca, uw, T) if determined_only and forb is None else None
        )
        sites = []
        for n in range(T + 1):
            _, (lo, hi) = syntactic_bounds(ca, ell, n)
            for m in range(lo, hi + 1):
                sites.append((m, n))

        def work(site):
            m, n = site
            if probes is not None:
                pv = probes.values(m, n)
                if len(pv) > 1:
                    return site, frozenset(pv)
            vals = _dispatch(ca, uw, m, n, forb, cap, stop_at)
            return site, frozenset(vals)

        results = {}
        if workers > 1:
            from concurrent.futures import ThreadPoolExecutor

            with ThreadPoolExecutor(max_workers=workers) as pool:
                for site, vals in pool.map(work, sites):
                    results[site] = vals
        else:
            for site in sites:
                site, vals = work(site)
                results[site] = vals
        for (m, n), vals in sorted(results.items()):
            if len(vals) == 1:
                rows[n][m] = ("det", next(iter(vals)))
            else:
                rows[n][m] = ("free", frozenset(vals))

    names = tuple(ca.alphabet.name(int(v)) for v in uw)
    triggers, violations = _translation_check(rows, ell)
    return ConsequenceCone(
        names,
        ca.name,
        T,
        rows,
        exact,
        triggers,
        violations,
    )


@dataclass(frozen=True)
class BlockingCertificate:
    """Witness that ``u`` blocks along ``h`` with width ``e`` through time ``T``."""

    word: tuple[str, ...]
    curve: str
    width: int
    offset: int
    horizon: int
    constraint: Optional[tuple] = None


@dataclass(frozen=True)
class BlockingRefutation:
    """Least-time site of the band that is not determined."""

    m: int
    n: int
    values: tuple[int, ...]


class SiteCache:
    """Shared per-(word, constraint, horizon) cache of site verdicts.

    With no constraint the verdicts come from the row-language engine
    (computed lazily row by row); otherwise each site runs the per-site
    frontier scan.  ``mode="site"`` forces the per-site scan everywhere.
    """

    def __init__(self, ca, uw, forb, cap, T=None, mode="auto"):
        self.ca = ca
        self.uw = uw
        self.forb = forb
        self.cap = cap
        self.T = T
        self._cache: dict[tuple[int, int], frozenset] = {}
        self._rows = None
        self._exact_rows = True
        if mode == "auto" and forb is None and T is not None:
            letters_fn, _ = _row_letter_maps(ca, uw, T, DEFAULT_ROW_STATE_CAP)
            self._rows = letters_fn

    def values(self, m: int, n: int, stop_at: Optional[int] = 2) -> frozenset:
        key = (m, n)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        if self._rows is not None and n <= self.T:
            letters = self._rows(n)
            if m in letters:
                vals = frozenset(letters[m])
                self._cache[key] = vals
                return vals
        vals = frozenset(
            _dispatch(self.ca, self.uw, m, n, self.forb, self.cap, stop_at)
        )
        # truncated non-singletons are still conclusive for determinacy
        self._cache[key] = vals
        return vals

    def determined(self, m: int, n: int) -> bool:
        return len(self.values(m, n)) == 1


def minimal_width(ca: CellularAutomaton, h: Curve, T: int) -> int:
    """Least legal band width for ``h`` over ``[0, T]`` (strict inequality)."""
    ms = h.max_step(T)
    r, s = ca.neighborhood.r, ca.neighborhood.s
    return max(ms + s, ms - r, 0) + 1


def _width_ok(ca, h, e, T):
    ms = h.max_step(T)
    r, s = ca.neighborhood.r, ca.neighborhood.s
    return e > max(ms + s, ms - r)


def is_blocking_during(
    ca: CellularAutomaton,
    u,
    h: Curve,
    e: int,
    p: int,
    T: int,
    constraint=None,
    cap: int = DEFAULT_FRONTIER_CAP,
    _cache: Optional[SiteCache] = None,
    site_engine: str = "auto",
):
    """Certificate iff every site of the width-``e`` band along ``h`` shifted
    by ``p`` is determined through time ``T``; else the least-time violation."""
    if not _width_ok(ca, h, e, T):
        raise WidthTooSmall(
            f"width {e} does not satisfy the strict width condition for "
            f"{h.description} over [0, {T}]"
        )
    uw = _word_indices(ca, u)
    forb = _forbidden_indices(ca, constraint)
    if forb is not None:
        _validate_word_against(ca, uw, forb)
    cache = _cache or SiteCache(ca, uw, forb, cap, T=T, mode=site_engine)
    hv = h.values(T)
    for n in range(T + 1):
        base = hv[n] + p
        for m in range(base, base + e):
            vals = cache.values(m, n)
            if len(vals) != 1:
                return BlockingRefutation(m, n, tuple(sorted(vals)))
    names = tuple(ca.alphabet.name(int(v)) for v in uw)
    return BlockingCertificate(
        names,
        h.description,
        e,
        p,
        T,
        tuple(tuple(f) for f in forb) if forb else None,
    )


def find_blocking(
    ca: CellularAutomaton,
    u,
    h: Curve,
    e: int,
    T: int,
    constraint=None,
    cap: int = DEFAULT_FRONTIER_CAP,
    site_engine: str = "auto",
    _cache: Optional[SiteCache] = None,
):
    """Scan offsets; return ``(p, certificate)`` for the least feasible ``p``.

    The scan range is wide enough that outside it the band provably exits
    the outer syntactic cone at some time ``n <= T``.
    """
    if not _width_ok(ca, h, e, T):
        raise WidthTooSmall(
            f"width {e} does not satisfy the strict width condition for "
            f"{h.description} over [0, {T}]"
        )
    uw = _word_indices(ca, u)
    forb = _forbidden_indices(ca, constraint)
    if forb is not None:
        _validate_word_against(ca, uw, forb)
    ell = len(uw)
    r, s = ca.neighborhood.r, ca.neighborhood.s
    reach = T * max(-r, s, 0)
    hv = h.values(T)
    cache = _cache or SiteCache(ca, uw, forb, cap, T=T, mode=site_engine)
    for p in range(-(reach + e), ell + reach + 1):
        fits = True
        for n in range(T + 1):
            lo, hi = hv[n] + p, hv[n] + p + e - 1
            olo, ohi = -n * s, ell - 1 - n * r
            if lo < olo or hi > ohi:
                fits = False
                break
        if not fits:
            continue
        verdict = is_blocking_during(
            ca, uw, h, e, p, T, constraint, cap, _cache=cache
        )
        if isinstance(verdict, BlockingCertificate):
            return p, verdict
    return None


def min_blocking_slope_numerator(
    ca: CellularAutomaton,
    u,
    n: int,
    e_policy="minimal",
    constraint=None,
    cap: int = DEFAULT_FRONTIER_CAP,
    largest: bool = False,
) -> int:
    """Smallest integer ``x`` such that ``u`` blocks during time ``n`` along
    the slope ``x/n`` (largest such ``x`` when ``largest`` is set)."""
    if n < 1:
        raise CaconesError("slope search needs n >= 1")
    uw = _word_indices(ca, u)
    ell = len(uw)
    r, s = ca.neighborhood.r, ca.neighborhood.s
    rp, sp = min(r, 0), max(s, 0)
    lo = n * (-sp) - ell
    hi = n * (-rp) + ell
    forb = _forbidden_indices(ca, constraint)
    cache = SiteCache(ca, uw, forb, cap, T=n)
    candidates = range(hi, lo - 1, -1) if largest else range(lo, hi + 1)
    for x in candidates:
        h = linear_curve(Fraction(x, n))
        e = e_policy if isinstance(e_policy, int) else minimal_width(ca, h, n)
        try:
            found = find_blocking(ca, uw, h, e, n, constraint, cap, _cache=cache)
        except WidthTooSmall:
            continue
        if found is not None:
            return x
    raise NoBlockingSlope(
        f"no integer slope numerator admits blocking during time {n}"
    )


@dataclass
class SlopeIntervalEstimate:
    """Monotone rational approximants of the blocking-slope interval."""

    horizon: int
    xs: list[int]
    ys: list[int]
    alphas: list[Fraction]
    betas: list[Fraction]

    def __post_init__(self):
        for a, b in zip(self.alphas, self.alphas[1:]):
            if b < a:
                raise CaconesError("alpha sequence must be nondecreasing")
        for a, b in zip(self.betas, self.betas[1:]):
            if b > a:
                raise CaconesError("beta sequence must be nonincreasing")
        for a, b in zip(self.alphas, self.betas):
            if a > b:
                raise CaconesError("alpha must never exceed beta")


def slope_interval_estimate(
    ca: CellularAutomaton,
    u,
    N: int,
    e_policy="minimal",
    constraint=None,
    cap: int = DEFAULT_FRONTIER_CAP,
) -> SlopeIntervalEstimate:
    """Exact rational approximants ``alpha_n`` (nondecreasing) and ``beta_n``
    (nonincreasing) of the interval of blocking slopes."""
    if N < 1:
        raise CaconesError("need N >= 1")
    xs, ys, alphas, betas = [], [], [], []
    for n in range(1, N + 1):
        x = min_blocking_slope_numerator(ca, u, n, e_policy, constraint, cap)
        y = min_blocking_slope_numerator(
            ca, u, n, e_policy, constraint, cap, largest=True
        )
        xs.append(x)
        ys.append(y)
        a = Fraction(x, n)
        b = Fraction(y, n)
        alphas.append(a if not alphas else max(a, alphas[-1]))
        betas.append(b if not betas else min(b, betas[-1]))
    return SlopeIntervalEstimate(N, xs, ys, alphas, betas)


def cone_text_lines(cone: ConsequenceCone, alphabet) -> list[str]:
    """Human-readable dump: one line per row, ``?`` at free sites."""
    lines = []
    for n in range(cone.horizon + 1):
        row = cone.rows[n]
        if not row:
            lines.append(f"t={n}: []")
            continue
        lo, hi = min(row), max(row)
        glyphs = []
        for m in range(lo, hi + 1):
            v = row.get(m)
            if v is None:
                glyphs.append(" ")
            elif v[0] == "det":
                glyphs.append(alphabet.name(v[1]))
            else:
                glyphs.append("?")
        lines.append(f"t={n}: [{lo}..{hi}] {''.join(glyphs)}")
    return lines


def cone_sets_lines(cone: ConsequenceCone, alphabet) -> list[str]:
    """Machine-readable dump with explicit per-site value sets."""
    lines = []
    for n in range(cone.horizon + 1):
        for m in sorted(cone.rows[n]):
            v = cone.rows[n][m]
            if v[0] == "det":
                vals = [alphabet.name(v[1])]
            else:
                vals = sorted(alphabet.name(x) for x in v[1])
            lines.append(f"n={n} m={m} {{{','.join(vals)}}}")
    return lines
