"""Exact analysis of one-dimensional cellular automata.

Cones of consequences of words, blocking words along bounded-variation
curves, and rational approximants of the interval of blocking slopes,
together with a small zoo of reference constructions and a CLI.
"""

from .core import (
    Alphabet,
    CellularAutomaton,
    Configuration,
    Neighborhood,
    SpaceTimeDiagram,
    add_transparency_layer,
    cantor_distance,
    evolve,
    make_rule,
    product,
    site_state,
    step,
)
from .curves import (
    Curve,
    CurveComparison,
    compare_curves,
    inverse_parabola,
    linear_curve,
    parabola_curve,
    parabola_value,
    table_curve,
)
from .consequences import (
    BlockingCertificate,
    BlockingRefutation,
    ConsequenceCone,
    SlopeIntervalEstimate,
    consequence_cone,
    find_blocking,
    is_blocking_during,
    min_blocking_slope_numerator,
    naive_possible_states,
    possible_states,
    slope_interval_estimate,
    syntactic_bounds,
)

__version__ = "0.1.0"
