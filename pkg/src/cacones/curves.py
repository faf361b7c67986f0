"""Curves of bounded variation and the discrete parabola.

All evaluation is exact: linear curves use rational arithmetic and the
parabola uses integer square roots.  No floating point enters any curve
value, since an off-by-one in a floor silently corrupts blocking verdicts
downstream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .errors import BoundViolation, HorizonExceeded


@dataclass
class Curve:
    """A map ``n -> h(n)`` on the nonnegative integers with bounded steps.

    Every query made through :meth:`value` or :meth:`values` checks the
    declared variation bound on all consecutive pairs it touches; a
    violation raises instead of silently producing garbage.
    """

    evaluator: Callable[[int], int]
    declared_bound: int
    description: str = "curve"
    _checked_to: int = field(default=0, init=False, repr=False)

    def __post_init__(self):
        if self.declared_bound <= 0:
            raise BoundViolation("variation bound must be a positive integer")

    def _check_through(self, n: int) -> None:
        if n <= self._checked_to:
            return
        prev = self.evaluator(self._checked_to)
        for k in range(self._checked_to + 1, n + 1):
            cur = self.evaluator(k)
            if abs(cur - prev) > self.declared_bound:
                raise BoundViolation(
                    f"{self.description}: |h({k}) - h({k - 1})| = "
                    f"{abs(cur - prev)} exceeds declared bound "
                    f"{self.declared_bound}"
                )
            prev = cur
        self._checked_to = n

    def value(self, n: int) -> int:
        if n < 0:
            raise HorizonExceeded("curves are defined on nonnegative times")
        self._check_through(n)
        return self.evaluator(n)

    def values(self, T: int) -> list[int]:
        """``[h(0), ..., h(T)]``."""
        self._check_through(T)
        return [self.evaluator(n) for n in range(T + 1)]

    def max_step(self, T: int) -> int:
        """``max over n < T of |h(n+1) - h(n)|`` (0 when ``T == 0``)."""
        vals = self.values(T)
        if len(vals) < 2:
            return 0
        return max(abs(b - a) for a, b in zip(vals, vals[1:]))


def linear_curve(alpha) -> Curve:
    """The direction ``n -> floor(alpha * n)``, with exact rationals."""
    alpha = Fraction(alpha)
    bound = int(math.ceil(abs(alpha))) + 1

    def h(n: int) -> int:
        return (alpha.numerator * n) // alpha.denominator

    return Curve(h, bound, f"linear[{alpha}]")


def constant_curve(c: int = 0) -> Curve:
    return Curve(lambda n: c, 1, f"constant[{c}]")


def identity_curve() -> Curve:
    return linear_curve(1)


def inverse_parabola(n: int) -> int:
    """``n -> n*(n+1) - 1``, the time at which the parabola reaches ``n``."""
    if n < 0:
        raise HorizonExceeded("inverse parabola defined on nonnegative integers")
    return n * (n + 1) - 1


def parabola_value(t: int) -> int:
    """``floor((sqrt(1 + 4(t+1)) - 1) / 2)`` with integer arithmetic only."""
    if t < 0:
        raise HorizonExceeded("parabola defined on nonnegative times")
    return (math.isqrt(4 * t + 5) - 1) // 2


def parabola_values(ts: np.ndarray) -> np.ndarray:
    """Vectorized :func:`parabola_value` (exact; float sqrt is corrected)."""
    ts = np.asarray(ts, dtype=np.int64)
    x = 4 * ts + 5
    s = np.sqrt(x.astype(np.float64)).astype(np.int64)
    s -= (s * s > x).astype(np.int64)
    s += ((s + 1) * (s + 1) <= x).astype(np.int64)
    return (s - 1) // 2


def parabola_curve() -> Curve:
    return Curve(parabola_value, 1, "parabola")


def table_curve(values: Sequence[int], bound: int) -> Curve:
    """A curve given by an explicit table on ``[0, len(values) - 1]``."""
    vals = [int(v) for v in values]
    for a, b in zip(vals, vals[1:]):
        if abs(b - a) > bound:
            raise BoundViolation(
                f"table step |{b} - {a}| exceeds declared bound {bound}"
            )

    def h(n: int) -> int:
        if n >= len(vals):
            raise HorizonExceeded(
                f"table curve defined on [0, {len(vals) - 1}], queried at {n}"
            )
        return vals[n]

    return Curve(h, bound, f"table[{len(vals)} values]")


@dataclass(frozen=True)
class CurveComparison:
    """Extremes of ``h - k`` over a finite horizon.

    Bounded differences at all tested horizons are evidence for ``h ~ k``;
    one-sided boundedness is evidence for ``h <~ k``.  This is a
    semi-decision: the relations quantify over all times and the artifact
    reports finite-horizon extremes only.
    """

    horizon: int
    max_diff: int
    min_diff: int

    def __post_init__(self):
        if self.min_diff > self.max_diff:
            raise BoundViolation("comparison with min_diff > max_diff")


def compare_curves(h: Curve, k: Curve, T: int) -> CurveComparison:
    hv = h.values(T)
    kv = k.values(T)
    diffs = [a - b for a, b in zip(hv, kv)]
    return CurveComparison(T, max(diffs), min(diffs))
