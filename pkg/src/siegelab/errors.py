"""Shared exception types."""


class SiegelabError(Exception):
    """Base class for all package-specific errors."""


class DegenerateAngle(SiegelabError):
    """Zero denominator, perfect-square D, or a zero angle where a nonzero one is required."""


class PrecisionExhausted(SiegelabError):
    """Stored or working precision cannot support the requested computation.

    The optional attribute ``required_bits`` says how much would have sufficed.
    """

    def __init__(self, msg, required_bits=None):
        super().__init__(msg)
        self.required_bits = required_bits


class Resonance(SiegelabError):
    """lambda^n = lambda exactly for some n in range; linearization undefined."""

    def __init__(self, n):
        super().__init__(f"resonance at n = {n}: lambda^n equals lambda exactly")
        self.n = n


class TooFewCoefficients(SiegelabError):
    """Not enough valid coefficients for a radius estimate."""


class ZeroScale(SiegelabError):
    """Rescaling by zero requested."""


class CenterOnBoundary(SiegelabError):
    """Inversion center within the degeneracy threshold of a boundary point."""


class DegenerateSample(SiegelabError):
    """Point set collapses (coincident points) under a distance-product operation."""


class OrbitEscaped(SiegelabError):
    """Critical orbit left the trapping disk; the angle is not suitable for sampling."""


class BoundedTypeRequired(SiegelabError):
    """Partial quotients exceed the configured cap for boundary sampling."""
