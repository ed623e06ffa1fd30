"""Exception hierarchy shared by all modules."""


class SchlesingerError(Exception):
    """Base class for every error raised by this package."""


class InvalidSystem(SchlesingerError, ValueError):
    """Pole/residue data violates a structural invariant."""


class EvaluationAtPole(SchlesingerError):
    pass


class DegenerateResidue(SchlesingerError):
    """Residue has a repeated eigenvalue (or is not diagonalizable)."""


class GaugeTagMismatch(SchlesingerError):
    pass


class HigherOrderPole(SchlesingerError):
    """A gauge transformation produced a pole of order >= 2.

    The structured description of the offending poles is kept in
    ``self.report`` (a :class:`schlesinger.fuchsian.PoleReport`).
    """

    def __init__(self, report):
        self.report = report
        worst = report.poles[0]
        super().__init__(
            f"pole of order {worst.order} at {worst.point!r}")


class PathTooClose(SchlesingerError):
    pass


class StepUnderflow(SchlesingerError):
    pass


class ReducibleRepresentation(SchlesingerError):
    pass


class FuchsViolation(SchlesingerError, ValueError):
    pass


class OutOfDisk(SchlesingerError, ValueError):
    """Series argument lies outside the allowed convergence disk."""


class NonconvergentParams(SchlesingerError, ValueError):
    pass


class ResonantParameters(SchlesingerError):
    pass


class SingularState(SchlesingerError):
    pass


class BlowUpDetected(SchlesingerError):
    def __init__(self, message, t_estimate=None, trajectory=None):
        super().__init__(message)
        self.t_estimate = t_estimate
        self.trajectory = trajectory


class DegenerateOffDiagonal(SchlesingerError):
    pass


class PoleCollision(SchlesingerError):
    pass
