"""Small reference rules: shift, identity, min3."""

from __future__ import annotations

from ..core import Alphabet, CellularAutomaton, Neighborhood, rule_from_function

BINARY = Alphabet(("0", "1"))


def shift_automaton() -> CellularAutomaton:
    """The shift map: ``F(x)[m] = x[m+1]``."""
    return rule_from_function(
        BINARY, Neighborhood(0, 1), lambda a, b: b, name="shift"
    )


def identity_automaton() -> CellularAutomaton:
    return rule_from_function(
        BINARY, Neighborhood(0, 0), lambda a: a, name="identity"
    )


def min3_automaton() -> CellularAutomaton:
    """``F(x)[i] = x[i-1] * x[i] * x[i+1]`` on binary states."""
    return rule_from_function(
        BINARY,
        Neighborhood(-1, 1),
        lambda a, b, c: str(int(a) * int(b) * int(c)),
        name="min3",
    )
