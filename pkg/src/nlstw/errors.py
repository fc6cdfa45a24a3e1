"""Exception types shared across the toolkit."""


class NlstwError(Exception):
    """Base class for all toolkit errors."""


class NonZeroXMean(NlstwError):
    """Field is not an x1-derivative on the torus (per-row mean does not vanish)."""


class DegenerateDirection(NlstwError):
    """No speed is identifiable: the field does not depend on x1."""


class ModulusTooSmall(NlstwError):
    """|psi| dips below the lifting threshold (vortex suspected)."""


class NonzeroWinding(NlstwError):
    """Phase circulates by a nonzero multiple of 2*pi along a period."""


class RhoNonpositive(NlstwError):
    """Modulation amplitude drives the density through zero."""


class PotentialNotNonnegative(NlstwError):
    """The potential V changes sign; the global momentum problem is ill-posed."""


class PotentialNonnegativeEverywhere(NlstwError):
    """V >= 0 everywhere: no stationary bubble exists."""


class KineticAboveKInfinity(NlstwError):
    """Requested kinetic constraint exceeds the blow-up threshold estimate."""


class MultiplierNonnegative(NlstwError):
    """Kinetic-constrained flow converged with a nonnegative multiplier (no speed)."""


class PotentialBarrierStuck(NlstwError):
    """Step underflow at the integral-potential barrier."""

    def __init__(self, message, iterate=None):
        super().__init__(message)
        self.iterate = iterate


class IterationDiverged(NlstwError):
    """Fixed-point iteration diverged."""


class ZeroModeContamination(NlstwError):
    """Per-row x-means grew above tolerance during the lump iteration."""


class NotConverged(NlstwError):
    """Iteration cap reached; carries the best iterate found so far."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class ConfigError(NlstwError):
    """Invalid run configuration."""
