"""Exception hierarchy shared by all pipeline stages."""


class MultihomError(Exception):
    """Base class for all package errors."""


class HypothesisViolation(MultihomError):
    """A coefficient field violates one of the structural hypotheses.

    Parameters
    ----------
    kind : str
        One of ``"rho_positivity"``, ``"diffusion_symmetry"``,
        ``"diffusion_coercivity"``, ``"cooperativity"``, ``"irreducibility"``.
    detail : str
        Human-readable description (which species pair, which node, value).
    """

    def __init__(self, kind, detail=""):
        self.kind = kind
        self.detail = detail
        super().__init__(f"{kind}: {detail}" if detail else kind)


class NoConvergence(MultihomError):
    """An iterative solver exhausted its budget without converging."""

    def __init__(self, message, iterations=None, residual=None):
        self.iterations = iterations
        self.residual = residual
        super().__init__(message)


class PositivityFailure(MultihomError):
    """A converged eigenfield has a non-positive component.

    Signals loss of the inverse-positivity certificate of the shifted
    iteration matrix (for example a convection-dominated central stencil
    that escaped the upwind downgrade).
    """


class DegenerateNormalization(MultihomError):
    """The weighted eigenfield pairing is non-positive; internal error."""


class CompatibilityViolation(MultihomError):
    """Right-hand side of the singular corrector system is incompatible."""


class SPDViolation(MultihomError):
    """The assembled dispersion tensor is not symmetric positive definite."""


class ResolutionMismatch(MultihomError):
    """Macroscopic and cell grids are not nested for the requested epsilon."""


class TimeMismatch(MultihomError):
    """Requested time is not among the stored snapshot instants."""
