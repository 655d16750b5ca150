"""Exception types raised by the library.

Each class names the violated invariant or unsupported request; they all
derive from WheelhouseError so callers can catch broadly.
"""


class WheelhouseError(Exception):
    pass


# -- flag graphs ------------------------------------------------------------

class MalformedInvolution(WheelhouseError):
    pass


class MixedEdgeDirection(WheelhouseError):
    pass


class BadLegLabels(WheelhouseError):
    pass


class UnknownVertex(WheelhouseError):
    pass


class NotAnEdge(WheelhouseError):
    pass


class UnknownGenerator(WheelhouseError):
    pass


# -- permutations / generator symmetries ------------------------------------

class BadRange(WheelhouseError):
    pass


class ArityMismatch(WheelhouseError):
    pass


class BadPartition(WheelhouseError):
    pass


# -- chain engine ------------------------------------------------------------

class InfiniteSlice(WheelhouseError):
    pass


class DSquaredFailed(WheelhouseError):
    pass


class RankMismatch(WheelhouseError):
    """Exact rank disagrees with a modular probe; aborts the computation."""


# -- superalgebra ------------------------------------------------------------

class SpaceMismatch(WheelhouseError):
    pass


class ParityError(WheelhouseError):
    pass


class SymmetryViolation(WheelhouseError):
    pass


class CutoffTooSmall(WheelhouseError):
    pass


# -- A-infinity engine -------------------------------------------------------

class NotAssociative(WheelhouseError):
    pass


class CutoffExceeded(WheelhouseError):
    pass


# -- CLI ---------------------------------------------------------------------

class UnknownComplex(WheelhouseError):
    pass


class RangeUnsupported(WheelhouseError):
    pass


class GenusUnsupported(WheelhouseError):
    pass


class ParseError(WheelhouseError):
    pass
