"""Exception types raised across the package."""


class DyadicInputError(ValueError):
    """Arguments do not describe a valid object (dimension mismatch, cube outside root, ...)."""


class DegenerateInputError(ValueError):
    """Input is admissible in shape but degenerate, e.g. f == 0 or mu(Q) == 0."""


class SingularityError(ValueError):
    """A negative power was requested of a function with a zero cell."""


class NonIntegrableError(ValueError):
    """A power weight exponent fell to -1 or below."""


class CoveringFailure(RuntimeError):
    """No shifted dyadic cube covers the query; would falsify the covering lemma."""


class AdmissibilityError(ValueError):
    """Exponent tuple violates a theorem hypothesis."""


class DepthInsufficientError(RuntimeError):
    """Tower depth too shallow for the witness norm to converge."""
