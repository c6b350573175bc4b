"""Exceptions raised by ubp and the exit codes the command line maps them to."""


EXIT_OK = 0
EXIT_INPUT = 2
EXIT_RUIN = 3
EXIT_CONVERGENCE = 4


class UBPError(Exception):
    exit_code = 1


class InputError(UBPError):
    """Malformed or invalid input data.

    Args:
        message: what is wrong
        row: 1-based line number in the source table, if known
        column: 1-based column number in the source table, if known
    """

    exit_code = EXIT_INPUT

    def __init__(self, message, row=None, column=None):
        self.row = row
        self.column = column

        location = []
        if row is not None:
            location.append("row {}".format(row))
        if column is not None:
            location.append("column {}".format(column))

        if location:
            message = "{} ({})".format(message, ", ".join(location))

        super().__init__(message)


class NotKellySequenceError(InputError):
    pass


class RuinError(UBPError):
    """A strategy (or the universal portfolio) lost all of its capital."""

    exit_code = EXIT_RUIN

    def __init__(self, message, period=None):
        self.period = period
        if period is not None:
            message = "{} in period {}".format(message, period)
        super().__init__(message)


class InfeasibleError(UBPError):
    exit_code = EXIT_RUIN


class ConvergenceError(UBPError):
    exit_code = EXIT_CONVERGENCE


class ApproximationWarning(RuntimeWarning):
    """The particle approximation of the universal portfolio has degenerated."""
