"""Exception types raised across the workbench.

Every error derives from :class:`WorkbenchError` so the CLI can map
validation problems to exit code 1 and anything else to exit code 2.
"""


class WorkbenchError(ValueError):
    """Base class for all input/validation errors."""


class NegativeWeight(WorkbenchError):
    pass


class AllZero(WorkbenchError):
    pass


class AbsoluteContinuityViolated(WorkbenchError):
    pass


class ShapeMismatch(WorkbenchError):
    pass


class OverlappingSets(WorkbenchError):
    pass


class UnknownCoordinate(WorkbenchError):
    pass


class TooLarge(WorkbenchError):
    pass


class VariableMismatch(WorkbenchError):
    pass


class UnknownVariable(WorkbenchError):
    pass


class DimensionMismatch(WorkbenchError):
    pass


class BadBudget(WorkbenchError):
    pass


class ThetaOutOfRange(WorkbenchError):
    pass


class SupportViolation(WorkbenchError):
    pass


class EmptyMessageSet(WorkbenchError):
    pass


class ParseError(WorkbenchError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}"
            if column is not None:
                where += f", column {column}"
            where += ": "
        super().__init__(where + message)


class StochasticityError(WorkbenchError):
    pass


class DimensionError(WorkbenchError):
    pass
