"""Exception hierarchy shared by all modules."""


class BHError(Exception):
    """Base class for every error raised by this package."""


class CurveError(BHError, ValueError):
    """A measured curve cannot be accepted."""


class TooFewSamples(CurveError):
    pass


class NonMonotone(CurveError):
    """B fails to increase strictly with H (hysteretic or corrupted data).

    ``row`` holds the first offending ``(h, b)`` pair in h-sorted order.
    """

    def __init__(self, message: str, row: tuple[float, float] | None = None):
        super().__init__(message)
        self.row = row


class CurveFormatError(CurveError):
    """Malformed curve CSV; ``line`` is 1-based."""

    def __init__(self, message: str, line: int | None = None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


class NonConvexExtension(CurveError):
    pass


class BSatTooSmall(CurveError):
    pass


class RangeError(BHError, ValueError):
    """Evaluation outside the domain where a law is defined."""


class OutOfRange(RangeError):
    pass


class NegativeB(RangeError):
    pass


class ExceedsRange(RangeError):
    pass


class OutOfPlane(RangeError):
    """A planar (two-curve) law was asked about a flux with a z component."""


class ZeroFlux(BHError, ValueError):
    pass


class NoConvergence(BHError, ArithmeticError):
    pass


class LevelUnreachable(BHError, ValueError):
    pass


class NonMonotoneRay(BHError, ValueError):
    def __init__(self, message: str, direction=None):
        super().__init__(message)
        self.direction = direction


class AllPointsOutOfRange(BHError, ValueError):
    pass


class LawSpecError(BHError, ValueError):
    """Invalid law composition document."""
