"""Exception types shared across the package."""


class CaconesError(Exception):
    """Base class for all domain errors."""


class MissingEntry(CaconesError):
    """Rule table is not total over the alphabet."""


class DuplicateEntry(CaconesError):
    """Rule table defines the same input word twice with conflicting outputs."""


class UnknownSymbol(CaconesError):
    """A symbol name does not belong to the alphabet."""


class ResourceLimit(CaconesError):
    """A configured resource cap (cells, frontier vectors) was exceeded."""


class BoundViolation(CaconesError):
    """A curve violated its declared variation bound."""


class HorizonExceeded(CaconesError):
    """A query went past the horizon on which an object is defined."""


class WidthTooSmall(CaconesError):
    """Blocking-band width does not satisfy the width condition."""


class NoBlockingSlope(CaconesError):
    """No integer slope numerator admits a blocking certificate."""


class InfeasibleConstraint(CaconesError):
    """No extension of the word satisfies the forbidden-word constraint."""


class PaletteIncomplete(CaconesError):
    """Render palette does not cover the automaton's alphabet."""


class TooManyColumns(CaconesError):
    """Column specification exceeds the configured maximum."""
