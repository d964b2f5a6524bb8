"""
Domain exceptions with CLI exit codes
"""

EXIT_OK = 0
EXIT_VERDICT_FAILED = 1
EXIT_BAD_INPUT = 2
EXIT_NUMERICAL = 3
EXIT_HELSTROM_FAILED = 4


class GpException(Exception):
    """Base error; `exit_code` is what the CLI returns when it escapes a command."""

    exit_code: int = EXIT_BAD_INPUT

    def __init__(self, detail: str, exit_code: int = None):
        super().__init__(detail)
        self.detail = detail
        if exit_code is not None:
            self.exit_code = exit_code


# LP kernel
class MalformedProgram(GpException):
    exit_code = EXIT_NUMERICAL


class NumericalFailure(GpException):
    """Cycling or ill-conditioning; retry with perturbation or the exact path."""
    exit_code = EXIT_NUMERICAL


# Model construction
class DegenerateModel(GpException):
    pass


class InvalidSymmetry(GpException):
    pass


class SingularMap(GpException):
    pass


class UnknownModel(GpException):
    pass


# States and effects
class InvalidEffect(GpException):
    pass


class InvalidMeasurement(GpException):
    pass


class OutsideSpan(GpException):
    pass


class PointOutsideModel(GpException):
    pass


class CoincidentPoints(GpException):
    pass


class BoundaryBasePoint(GpException):
    pass


# Information measures
class ConvergenceFailure(GpException):
    exit_code = EXIT_NUMERICAL


# Helstrom families
class InvalidEnsemble(GpException):
    pass


class DegenerateConjugate(GpException):
    pass


class InfeasibleFamily(GpException):
    exit_code = EXIT_NUMERICAL


# Symmetry
class NoSymmetryRecorded(GpException):
    pass


class NotTransitive(GpException):
    pass
