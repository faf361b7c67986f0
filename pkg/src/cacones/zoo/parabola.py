"""The parabola automaton: a 5-state radius-1 rule whose black region,
grown from the seed word ``VRK``, has left edge on the discrete parabola
and right edge on the light ray.

States (one signal per cell):

* ``E`` -- empty cell,
* ``K`` -- black segment state; moves up and right (duplicates rightward),
* ``V`` -- vertical wall; moves up,
* ``R`` -- right-moving bouncer,
* ``L`` -- left-moving bouncer.

Interactions, resolved by a single priority chain (push > K-persistence >
K-arrival > V > turnarounds > crossings > plain motion > empty):

* an ``R`` reaching the leftmost ``K`` erases it and turns into ``L`` on
  that cell (a "push" of the segment's left border),
* an ``L`` reaching a ``V`` turns into ``R`` without moving onto it,
* ``K`` erases ``V`` when expanding onto it; ``V`` otherwise persists,
* ``R`` and ``L`` meeting head-on (adjacent or on one cell) erase the
  ``R``; the ``L`` travels on,
* an ``R`` running into a ``V`` disappears.

The push cadence makes the left border of a lone segment leave cell ``n``
at time ``n*(n+1) - 1``, which is exactly the inverse of the parabola.
"""

from __future__ import annotations

from ..core import Alphabet, CellularAutomaton, Neighborhood, rule_from_function

PARABOLA_ALPHABET = Alphabet(("E", "K", "V", "R", "L"))


def _rule(a: str, b: str, c: str) -> str:
    # push: R enters the K cell from the left, K erased, bouncer turns around
    if b == "K" and a == "R":
        return "L"
    if b == "K":
        return "K"
    if a == "K":
        return "K"  # K duplicates rightward, beating V and an arriving L
    if b == "V":
        return "V"
    if b == "L" and a == "V":
        return "R"  # turnaround happens in place, one cell right of the V
    if c == "L":
        # L arrives from the right; it survives any crossing with an R
        return "L"
    if a == "R" and b in ("E", "R"):
        return "R"
    return "E"


def parabola_automaton() -> CellularAutomaton:
    return rule_from_function(
        PARABOLA_ALPHABET, Neighborhood(-1, 1), _rule, name="parabola"
    )
