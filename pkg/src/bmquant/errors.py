"""Exception hierarchy shared by every bmquant module."""


class BmqError(Exception):
    """Base class for all bmquant errors."""


class UnboundedError(BmqError):
    """Raised when a polytope expected to be compact is not."""


class SpecError(BmqError):
    """A manifold specification failed validation."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class NonOrientableError(BmqError):
    """Sign propagation found an odd cycle of Z-crossings with m odd."""


class OverlapError(BmqError):
    """Two regions of the same piece share a lattice point."""

    def __init__(self, message, pair=None):
        super().__init__(message)
        self.pair = pair


class NonProperRestrictionError(BmqError):
    """A ray direction is killed by the restriction map.

    This is the combinatorial shadow of the subtorus having zero leading
    modular weight, so its moment map is not proper.
    """


class FinitenessViolation(BmqError):
    """An odd-m quantization kept a nonzero ray."""
