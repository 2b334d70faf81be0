"""Exception hierarchy shared by all modules."""


class MomentError(Exception):
    """Base class for library errors."""


class NonFinite(MomentError, ArithmeticError):
    """Evaluation produced NaN/inf or left a function's domain (chart singularity)."""


class SingularChart(NonFinite):
    """A chart point lies on or outside the boundary of a realization's domain."""


class NegativeDiscriminant(SingularChart):
    """The square-root radicand of the two-DOF realization is negative."""


class MissingMoment(MomentError, KeyError):
    pass


class MissingPredecessor(MomentError, KeyError):
    """Recursive moment generation has no realized base moment."""


class DegreeTooLarge(MomentError, ValueError):
    pass


class SmoothnessRequired(MomentError, ValueError):
    """A Taylor expansion was requested for a potential flagged non-differentiable."""


class NoMinimumFound(MomentError, RuntimeError):
    pass


class NonConvergedEigen(MomentError, RuntimeError):
    pass


class SingularityStop(MomentError, RuntimeError):
    """Integration hit a chart boundary and cannot continue."""

    def __init__(self, message, trajectory=None):
        super().__init__(message)
        self.trajectory = trajectory


class StepFailure(MomentError, RuntimeError):
    pass


class CutoffTooSmall(MomentError, RuntimeError):
    pass


class NotPositiveDefinite(MomentError, ValueError):
    pass


class ComplexFrequency(MomentError, ValueError):
    """A normal-mode frequency squared is negative (unstable direction)."""


class SeriesDiverging(MomentError, RuntimeError):
    pass


class DensityFloorHit(MomentError, ValueError):
    pass
