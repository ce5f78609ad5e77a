"""Exception types shared across the package."""


class NumericsError(RuntimeError):
    """A numerical procedure failed to converge or produced invalid values.

    Carries an ``error_estimate`` attribute when a quantitative estimate of
    the failure is available.
    """

    def __init__(self, message, error_estimate=None):
        super().__init__(message)
        self.error_estimate = error_estimate


class SpectralAnomalyError(NumericsError):
    """ln det(I - M) came out positive.

    On the imaginary frequency axis every round-trip eigenvalue must lie
    inside the unit disk, so a positive log-determinant signals a truncation
    that is too small or a scattering bug, not physics.
    """
