"""Exception types shared across the package."""


class NumericalError(RuntimeError):
    """An iterative computation failed to converge or lost accuracy."""


class GridTooCoarseError(NumericalError):
    """Sampling grid cannot resolve the function (e.g. phase unwrap jumps)."""


class DegenerateInputError(ValueError):
    """Input contains (numerically) coincident values where distinct ones are required."""


class InconsistentSpectraError(ValueError):
    """Eigenvalue families do not satisfy the constraints of a valid spectral pair."""
