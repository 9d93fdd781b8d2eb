"""Exception hierarchy shared by all modules."""


class SingfemError(Exception):
    """Base class for all package-specific failures."""


class GradingError(SingfemError):
    """A grading map produced an inverted or degenerate element."""

    def __init__(self, message, element=None):
        super().__init__(message)
        self.element = element


class MeshConstructionError(SingfemError):
    """A mesh generator could not complete a valid construction."""


class AssemblyError(SingfemError):
    """Assembly hit a degenerate element."""


class PointLocationError(SingfemError):
    """A point could not be located inside any mesh element."""


class ClippingError(SingfemError):
    """A segment left the mesh while being clipped against elements."""


class EmptySystemError(SingfemError):
    """Dirichlet elimination removed every unknown."""


class SolverError(SingfemError):
    """Iterative solve failed to reach the requested tolerance."""

    def __init__(self, message, iterate=None, residual=None):
        super().__init__(message)
        self.iterate = iterate
        self.residual = residual


class NotSPDError(SolverError):
    """The system matrix is not symmetric positive definite."""


class QuadratureError(SingfemError):
    """Quadrature could not avoid a singular evaluation."""


class SingularEvaluationError(SingfemError):
    """An exact solution was evaluated on its singular set."""


class NoTheoremError(SingfemError):
    """No convergence theorem covers the requested configuration."""
