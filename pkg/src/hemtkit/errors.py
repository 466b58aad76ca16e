"""Exception hierarchy.

Two families matter to callers: :class:`ValidationError` (bad input, CLI exit 1)
and :class:`NumericalError` (the data or solver could not deliver, CLI exit 2).
"""


class HemtkitError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(HemtkitError, ValueError):
    pass


class NumericalError(HemtkitError, ArithmeticError):
    pass


# -- ingestion ---------------------------------------------------------------

class MissingColumn(ValidationError):
    def __init__(self, column, path=None):
        self.column = column
        self.path = path
        where = f" in {path}" if path else ""
        super().__init__(f"missing column {column!r}{where}")


class NonNumericCell(ValidationError):
    def __init__(self, row, column=None, value=None):
        self.row = row
        self.column = column
        self.value = value
        super().__init__(f"non-numeric cell at row {row} (column {column!r}: {value!r})")


class EmptyFamily(ValidationError):
    pass


class InconsistentKind(ValidationError):
    pass


class NoOverlap(ValidationError):
    pass


class InvalidCurve(ValidationError):
    pass


# -- numerics ----------------------------------------------------------------

class TooFewPoints(ValidationError):
    pass


class SeriesShorterThanWindow(ValidationError):
    pass


class DegenerateWindow(ValidationError):
    pass


# -- extraction --------------------------------------------------------------

class NoSubthresholdRegion(NumericalError):
    pass


class FlatCapacitance(NumericalError):
    pass


class NonPositiveArea(ValidationError):
    pass


class NoLinearRegion(NumericalError):
    pass


class NoSaturation(NumericalError):
    pass


class ThresholdNotCrossed(NumericalError):
    pass


class ChargeCurveMismatch(ValidationError):
    pass


class AllPointsGuarded(NumericalError):
    pass


# -- band solver -------------------------------------------------------------

class GridTooCoarse(ValidationError):
    pass


class NotConverged(NumericalError):
    def __init__(self, message, solution=None):
        super().__init__(message)
        self.solution = solution


class NonFiniteResidual(NumericalError):
    pass


class EigSolverFailure(NumericalError):
    pass
