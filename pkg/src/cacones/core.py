"""Exact 1D cellular automata on periodic and finite-support configurations.

Conventions used throughout the package:

* a rule with neighborhood ``[r, s]`` maps ``F(x)[m] = table(x[m+r], ..., x[m+s])``;
  ``r`` may be negative and usually is,
* symbols are referenced by integer index internally; names appear only at
  the I/O boundary,
* configurations are immutable values; every operation returns a new one.

Automata come in three representations: a plain lookup table, a cartesian
product of two automata (componentwise evolution) and a "transparency"
wrapper that adds a binary layer which is copied verbatim except that it is
zeroed whenever the main layer enters a designated symbol.  The structured
representations evolve componentwise and only materialize a full product
table on demand.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .errors import (
    CaconesError,
    DuplicateEntry,
    MissingEntry,
    ResourceLimit,
    UnknownSymbol,
)

DEFAULT_CELL_CAP = int(os.environ.get("CACONES_CELL_CAP", 2_000_000))


@dataclass(frozen=True)
class Alphabet:
    """Ordered finite set of symbol names; a symbol's index is its position."""

    symbols: tuple[str, ...]

    def __post_init__(self):
        if len(self.symbols) < 1:
            raise CaconesError("alphabet must contain at least one symbol")
        if len(set(self.symbols)) != len(self.symbols):
            raise CaconesError("alphabet symbols must be unique")

    @property
    def size(self) -> int:
        return len(self.symbols)

    def index(self, name: str) -> int:
        try:
            return self.symbols.index(name)
        except ValueError:
            raise UnknownSymbol(f"symbol {name!r} not in alphabet") from None

    def name(self, index: int) -> str:
        return self.symbols[index]

    def word_indices(self, word: Sequence[str]) -> np.ndarray:
        return np.array([self.index(w) for w in word], dtype=np.int32)


def pair_alphabet(a: Alphabet, b: Alphabet) -> Alphabet:
    """Alphabet of pairs, named ``(x,y)``; index = ix * b.size + iy."""
    return Alphabet(tuple(f"({x},{y})" for x in a.symbols for y in b.symbols))


@dataclass(frozen=True)
class Neighborhood:
    """Window ``[r, s]`` read by the local rule, relative to the cell."""

    r: int
    s: int

    def __post_init__(self):
        if self.r > self.s:
            raise CaconesError(f"neighborhood needs r <= s, got [{self.r}, {self.s}]")

    @property
    def width(self) -> int:
        return self.s - self.r + 1


def _as_readonly(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr, dtype=np.int32)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class CellularAutomaton:
    """A validated 1D cellular automaton.

    ``structure`` is ``None`` for plain table rules, ``("product", ca1, ca2)``
    for cartesian products and ``("transparency", base, marked_index)`` for
    the binary-layer wrapper.  ``table`` is the flat lookup array indexed by
    the window word read as a base-``q`` number (leftmost symbol most
    significant); it may be ``None`` for structured automata until
    :meth:`table_array` materializes it.
    """

    alphabet: Alphabet
    neighborhood: Neighborhood
    name: str = "rule"
    table: Optional[np.ndarray] = None
    structure: Optional[tuple] = None

    def __post_init__(self):
        if self.table is None and self.structure is None:
            raise CaconesError("automaton needs a table or a structure")
        if self.table is not None:
            q, w = self.alphabet.size, self.neighborhood.width
            if self.table.shape != (q**w,):
                raise MissingEntry(
                    f"table has {self.table.shape[0]} entries, expected {q**w}"
                )
            if self.table.size and (
                self.table.min() < 0 or self.table.max() >= q
            ):
                raise UnknownSymbol("table output outside the alphabet")

    @property
    def q(self) -> int:
        return self.alphabet.size

    def apply_local(self, windows: np.ndarray) -> np.ndarray:
        """Map an ``(N, width)`` array of window words to ``(N,)`` outputs."""
        if self.structure is None or self.table is not None:
            q = self.q
            idx = windows[:, 0].astype(np.int64)
            for k in range(1, windows.shape[1]):
                idx = idx * q + windows[:, k]
            return self.table_array()[idx].astype(np.int32)
        kind = self.structure[0]
        if kind == "product":
            ca1, ca2 = self.structure[1], self.structure[2]
            q2 = ca2.q
            r = self.neighborhood.r
            o1 = ca1.neighborhood.r - r
            o2 = ca2.neighborhood.r - r
            w1 = ca1.neighborhood.width
            w2 = ca2.neighborhood.width
            out1 = ca1.apply_local(windows[:, o1 : o1 + w1] // q2)
            out2 = ca2.apply_local(windows[:, o2 : o2 + w2] % q2)
            return out1 * q2 + out2
        if kind == "transparency":
            base, marked = self.structure[1], self.structure[2]
            new_main = base.apply_local(windows // 2)
            center = -self.neighborhood.r
            old_bit = windows[:, center] % 2
            return new_main * 2 + np.where(new_main == marked, 0, old_bit)
        raise CaconesError(f"unknown structure kind {kind!r}")

    def table_array(self) -> np.ndarray:
        """The full lookup table, materializing it for structured automata."""
        if self.table is not None:
            return self.table
        q, w = self.q, self.neighborhood.width
        n = q**w
        if n > 80_000_000:
            raise ResourceLimit(f"refusing to materialize a {n}-entry table")
        windows = np.empty((n, w), dtype=np.int32)
        idx = np.arange(n, dtype=np.int64)
        for k in range(w - 1, -1, -1):
            windows[:, k] = idx % q
            idx //= q
        tab = _as_readonly(self.apply_local(windows))
        object.__setattr__(self, "table", tab)
        return tab

    def lookup(self, window: Sequence[int]) -> int:
        out = self.apply_local(np.array([window], dtype=np.int32))
        return int(out[0])


@dataclass(frozen=True)
class Configuration:
    """A point of the configuration space, finitely described.

    ``kind`` is ``"periodic"`` (``x[i] = word[(i - phase) % len]``) or
    ``"finite"`` (``word`` over a uniform ``background``, left end at
    ``offset``; the word may be empty for a uniform configuration).
    """

    alphabet: Alphabet
    kind: str
    word: np.ndarray
    phase: int = 0
    background: int = 0
    offset: int = 0

    def __post_init__(self):
        word = np.ascontiguousarray(self.word, dtype=np.int32)
        if self.kind == "periodic":
            if len(word) < 1:
                raise CaconesError("periodic word must be nonempty")
        elif self.kind == "finite":
            # Normalize: trim background cells so equal configurations have
            # equal stored forms (keeps __hash__ consistent with __eq__).
            keep = np.nonzero(word != self.background)[0]
            if len(keep) == 0:
                word = word[:0]
                object.__setattr__(self, "offset", 0)
            elif keep[0] > 0 or keep[-1] < len(word) - 1:
                object.__setattr__(self, "offset", self.offset + int(keep[0]))
                word = word[keep[0] : keep[-1] + 1]
        else:
            raise CaconesError(f"unknown configuration kind {self.kind!r}")
        object.__setattr__(self, "word", _as_readonly(word))

    @classmethod
    def periodic(cls, alphabet: Alphabet, word: Sequence[str], phase: int = 0):
        return cls(alphabet, "periodic", alphabet.word_indices(word), phase=phase)

    @classmethod
    def finite(
        cls,
        alphabet: Alphabet,
        word: Sequence[str],
        background: str,
        offset: int = 0,
    ):
        return cls(
            alphabet,
            "finite",
            alphabet.word_indices(word),
            background=alphabet.index(background),
            offset=offset,
        )

    def value_at(self, i: int) -> int:
        if self.kind == "periodic":
            return int(self.word[(i - self.phase) % len(self.word)])
        j = i - self.offset
        if 0 <= j < len(self.word):
            return int(self.word[j])
        return self.background

    def values(self, lo: int, hi: int) -> np.ndarray:
        """Symbol indices on the integer interval ``[lo, hi]`` inclusive."""
        idx = np.arange(lo, hi + 1, dtype=np.int64)
        if self.kind == "periodic":
            return self.word[(idx - self.phase) % len(self.word)].astype(np.int32)
        out = np.full(idx.shape, self.background, dtype=np.int32)
        j = idx - self.offset
        inside = (j >= 0) & (j < len(self.word))
        out[inside] = self.word[j[inside]]
        return out

    def names(self, lo: int, hi: int) -> list[str]:
        return [self.alphabet.name(v) for v in self.values(lo, hi)]

    def support(self) -> tuple[int, int]:
        """Interval ``[lo, hi]`` holding the stored word (finite kind only)."""
        return self.offset, self.offset + len(self.word) - 1

    def __eq__(self, other) -> bool:
        if not isinstance(other, Configuration):
            return NotImplemented
        return cantor_distance(self, other) == 0

    def __hash__(self):
        if self.kind == "periodic":
            rot = canonical_rotation(self.word, self.phase)
            n = len(rot)
            for p in range(1, n + 1):
                if n % p == 0 and (rot == np.tile(rot[:p], n // p)).all():
                    rot = rot[:p]  # primitive period, so hash matches __eq__
                    break
            return hash(("periodic", rot.tobytes()))
        return hash(
            ("finite", self.word.tobytes(), self.background, self.offset)
        )


def canonical_rotation(word: np.ndarray, phase: int) -> np.ndarray:
    """The absolute word ``w[i] = x[i]`` for ``i`` in ``[0, len)``."""
    n = len(word)
    idx = (np.arange(n) - phase) % n
    return word[idx]


@dataclass
class SpaceTimeDiagram:
    """Rows ``rows[n] = F^n(x)`` for ``0 <= n <= horizon``."""

    rows: list[Configuration]
    automaton_name: str
    horizon: int

    def site(self, m: int, n: int) -> int:
        return self.rows[n].value_at(m)


def make_rule(
    alphabet: Alphabet,
    nb: Neighborhood,
    table_entries: Iterable[tuple[Sequence[str], str]],
    name: str = "rule",
) -> CellularAutomaton:
    """Build and validate a table rule from (input word, output symbol) pairs."""
    q, w = alphabet.size, nb.width
    table = np.full(q**w, -1, dtype=np.int32)
    for word, out in table_entries:
        if len(word) != w:
            raise MissingEntry(
                f"input word {tuple(word)!r} has length {len(word)}, expected {w}"
            )
        idx = 0
        for symbol in word:
            idx = idx * q + alphabet.index(symbol)
        out_idx = alphabet.index(out)
        if table[idx] != -1 and table[idx] != out_idx:
            raise DuplicateEntry(f"conflicting outputs for input {tuple(word)!r}")
        table[idx] = out_idx
    if (table == -1).any():
        missing = int((table == -1).sum())
        raise MissingEntry(f"table is missing {missing} of {q**w} entries")
    return CellularAutomaton(alphabet, nb, name=name, table=_as_readonly(table))


def rule_from_function(
    alphabet: Alphabet,
    nb: Neighborhood,
    fn: Callable[..., str],
    name: str = "rule",
) -> CellularAutomaton:
    """Build a table rule from a function of window symbol names."""
    from itertools import product as iproduct

    entries = [
        (word, fn(*word)) for word in iproduct(alphabet.symbols, repeat=nb.width)
    ]
    return make_rule(alphabet, nb, entries, name=name)


def step(ca: CellularAutomaton, x: Configuration) -> Configuration:
    """One exact application of the global map."""
    r, s = ca.neighborhood.r, ca.neighborhood.s
    w = ca.neighborhood.width
    if x.kind == "periodic":
        n = len(x.word)
        cols = (np.arange(n)[:, None] + np.arange(r, s + 1)[None, :]) % n
        # new_word[j] covers position j + phase; its window in absolute
        # coordinates is word[(j + r + k) % n].
        windows = x.word[cols]
        new_word = ca.apply_local(windows)
        return Configuration(x.alphabet, "periodic", new_word, phase=x.phase)
    new_bg = ca.lookup([x.background] * w)
    n = len(x.word)
    if n == 0:
        return Configuration(
            x.alphabet, "finite", x.word, background=new_bg, offset=x.offset
        )
    lo = x.offset - s
    hi = x.offset + n - 1 - r
    src = x.values(lo + r, hi + s)
    count = hi - lo + 1
    windows = np.lib.stride_tricks.sliding_window_view(src, w)[:count]
    new_word = ca.apply_local(np.ascontiguousarray(windows))
    keep = np.nonzero(new_word != new_bg)[0]
    if len(keep) == 0:
        new_word = new_word[:0]
        new_lo = lo
    else:
        new_word = new_word[keep[0] : keep[-1] + 1]
        new_lo = lo + int(keep[0])
    return Configuration(
        x.alphabet, "finite", new_word, background=new_bg, offset=new_lo
    )


def evolve(
    ca: CellularAutomaton,
    x: Configuration,
    T: int,
    cell_cap: int = DEFAULT_CELL_CAP,
) -> SpaceTimeDiagram:
    """Space-time diagram with rows ``F^0(x) .. F^T(x)``."""
    if T < 0:
        raise CaconesError("horizon must be nonnegative")
    rows = [x]
    for _ in range(T):
        x = step(ca, x)
        if x.kind == "finite" and len(x.word) > cell_cap:
            raise ResourceLimit(
                f"finite-support row exceeded the {cell_cap}-cell cap"
            )
        rows.append(x)
    return SpaceTimeDiagram(rows, ca.name, T)


def site_state(ca: CellularAutomaton, x: Configuration, m: int, n: int) -> int:
    """Color ``F^n(x)[m]`` of the site ``(m, n)``."""
    if n < 0:
        raise CaconesError("time index must be nonnegative")
    for _ in range(n):
        x = step(ca, x)
    return x.value_at(m)


def product(ca1: CellularAutomaton, ca2: CellularAutomaton) -> CellularAutomaton:
    """Cartesian product; each component reads its own sub-window."""
    nb = Neighborhood(
        min(ca1.neighborhood.r, ca2.neighborhood.r),
        max(ca1.neighborhood.s, ca2.neighborhood.s),
    )
    return CellularAutomaton(
        pair_alphabet(ca1.alphabet, ca2.alphabet),
        nb,
        name=f"{ca1.name}x{ca2.name}",
        structure=("product", ca1, ca2),
    )


BIT_ALPHABET = Alphabet(("0", "1"))


def add_transparency_layer(
    ca: CellularAutomaton, marked: str
) -> CellularAutomaton:
    """Add a binary layer, kept unchanged except zeroed on entering ``marked``."""
    marked_idx = ca.alphabet.index(marked)
    return CellularAutomaton(
        pair_alphabet(ca.alphabet, BIT_ALPHABET),
        ca.neighborhood,
        name=f"{ca.name}+bit",
        structure=("transparency", ca, marked_idx),
    )


def projections(ca: CellularAutomaton) -> tuple:
    """Component automata of a product (or transparency base), if structured."""
    if ca.structure is None:
        raise CaconesError("automaton has no components")
    return ca.structure[1:]


def cantor_distance(x: Configuration, y: Configuration):
    """``0`` if equal as points of the full shift, else ``2^-k`` (exact).

    ``k`` is the least ``|i|`` with ``x[i] != y[i]``; decidable here because
    both configurations are finitely described.
    """
    if x.kind == "periodic" and y.kind == "periodic":
        bound = int(np.lcm(len(x.word), len(y.word)))
    else:
        bound = 1
        for c in (x, y):
            if c.kind == "periodic":
                bound += len(c.word)
            else:
                bound += max(abs(c.offset), abs(c.offset + len(c.word))) + len(
                    c.word
                )
    lo, hi = -bound - 1, bound + 1
    xv = x.values(lo, hi)
    yv = y.values(lo, hi)
    diff = np.nonzero(xv != yv)[0]
    if len(diff) == 0:
        # The window strictly contains both supports (plus a full period for
        # periodic operands), so agreement on it implies equality on all of Z.
        return 0
    positions = np.abs(diff + lo)
    k = int(positions.min())
    return Fraction(1, 2**k)


def shift_configuration(x: Configuration, by: int = 1) -> Configuration:
    """The configuration ``sigma^by(x)``, i.e. ``y[i] = x[i + by]``."""
    if x.kind == "periodic":
        return Configuration(x.alphabet, "periodic", x.word, phase=x.phase - by)
    return Configuration(
        x.alphabet,
        "finite",
        x.word,
        background=x.background,
        offset=x.offset - by,
    )
