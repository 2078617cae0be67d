"""Exception types shared across the engine."""


class IcspError(Exception):
    """Base class for everything this package raises on purpose."""


class Inconsistency(IcspError):
    """The constraint store is unsatisfiable.

    Raised when propagation derives a contradiction: an element is forced
    into a set that is closed without it, a set relation is violated, or a
    variable runs out of usable values. Search catches this to backtrack;
    the top-level drivers turn it into an "inconsistent" verdict.
    """


class SourceContractError(IcspError):
    """An acquisition source produced an element its set already knows.

    This is a defect in the problem setup rather than an inconsistency of
    the constraints, so it deliberately does not subclass Inconsistency:
    search must not mask it by backtracking, and repeated elements must
    surface as a diagnostic instead of a propagation loop.
    """
