"""Exception types shared across the package.

Numerical probes distinguish "outside the formula's domain" (raised)
from "diagnostic failed" (reported in audit output, never raised).
"""


class AnosovLabError(Exception):
    """Base class for all package errors."""


class NonConvergence(AnosovLabError):
    """Power iteration did not settle within its budget (near-degenerate top pair)."""


class DegenerateConfiguration(AnosovLabError):
    """Cross-ratio input fails collinearity or distinctness."""


class NotInL(AnosovLabError):
    """Pair (v, alpha) has non-positive pairing, so it is not a flow-space point."""


class NotTransverse(AnosovLabError):
    """A required line/hyperplane pairing vanishes or has the wrong sign."""


class BaseMismatch(AnosovLabError):
    """Tangent operation on vectors with different base points."""


class NotOnLeaf(AnosovLabError):
    """Point or vector is not on the required stable/unstable leaf."""


class NotProximal(AnosovLabError):
    """Element has no simple real dominant eigenvalue."""


class BudgetExceeded(AnosovLabError):
    """Enumeration exceeded the configured element cap."""


class UnsupportedPresentation(AnosovLabError):
    """Operation requires a free presentation."""


class InsufficientData(AnosovLabError):
    """Not enough inputs for the requested fit or estimate."""


class DegenerateBall(AnosovLabError):
    """Dynamical ball has zero diameter at the sampling resolution."""


class NoStableSample(AnosovLabError):
    """No atlas point lands on the requested local stable leaf."""


class AbscissaViolation(AnosovLabError):
    """Euler-product evaluation requested left of the convergence abscissa."""


class DomainError(AnosovLabError):
    """Argument outside the mathematical domain of the function."""


class PingPongFailure(AnosovLabError):
    """Interval images violate the ping-pong containment."""


class NotIsotropic(AnosovLabError):
    """Projective component is not on the light cone."""


class DegenerateSpan(AnosovLabError):
    """Triple spans a subspace on which the form degenerates."""


class NotInterior(AnosovLabError):
    """Point is not in the interior of the convex body."""


class DegenerateChord(AnosovLabError):
    """Chord data (endpoints or tangents) is degenerate."""


class ConfigError(AnosovLabError):
    """Run configuration failed to parse or validate."""
