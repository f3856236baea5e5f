"""Exception types raised by the library."""


class OocError(Exception):
    """Base class for every library-specific error."""


# -- directed graphs ---------------------------------------------------------

class SelfLoop(OocError):
    """An edge connects a node to itself."""


class DuplicateEdge(OocError):
    """The same directed edge was given twice."""


class BadIndex(OocError):
    """A node index is outside 1..n."""


class NotStronglyConnected(OocError):
    """The digraph has more than one strongly connected component."""


class NullSpaceDegenerate(OocError):
    """The kernel of L^T is not one-dimensional at tolerance."""


# -- cost functions ----------------------------------------------------------

class ParseError(OocError):
    """Malformed expression or scenario text.

    Carries ``position`` (character offset or line number) when known.
    """

    def __init__(self, message, position=None, expected=None):
        self.position = position
        self.expected = expected
        detail = message
        if position is not None:
            detail += f" (at position {position}"
            detail += f", expected {expected})" if expected else ")"
        super().__init__(detail)


class DomainError(OocError):
    """Expression evaluated outside its mathematical domain."""


class NotPositiveDefinite(OocError):
    """Quadratic form matrix is not symmetric positive definite."""


class NonConvexDetected(OocError):
    """Sampled gradient monotonicity quotient was negative beyond tolerance."""


class NoConvergence(OocError):
    """Iterative solve hit its iteration cap; the problem is likely mis-specified."""


# -- plants and gains --------------------------------------------------------

class Unsolvable(OocError):
    """Regulation equations have no solution at the required residual."""


class NotHurwitz(OocError):
    """A closed-loop or observer matrix has an eigenvalue with Re >= 0."""


class NotStabilizable(OocError):
    """(A, B) fails the Hautus test at an unstable eigenvalue."""


class NotDetectable(OocError):
    """(A, C) fails the dual Hautus test at an unstable eigenvalue."""


# -- controller and simulation -----------------------------------------------

class ConfigOverridesV0(OocError):
    """A scenario tried to set a nonzero v(0); the law requires v(0) = 0."""


class ZGuardViolated(OocError):
    """An agent's own z component fell to or below the positivity guard."""

    def __init__(self, message, time=None):
        self.time = time
        if time is not None:
            message += f" (t = {time:g})"
        super().__init__(message)


class NumericalBlowup(OocError):
    """Integration produced a non-finite state."""

    def __init__(self, message, time=None):
        self.time = time
        if time is not None:
            message += f" (t = {time:g})"
        super().__init__(message)


# -- scenario files ----------------------------------------------------------

class ValidationError(OocError):
    """Scenario document is syntactically fine but semantically wrong."""
