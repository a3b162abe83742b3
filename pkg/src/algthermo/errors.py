"""Exception hierarchy shared by the library and the command line.

Validation problems (bad caps, bad files, parameters outside the region where
enclosures are certified) and numerical-condition problems (singular systems,
non-converging correctors) are kept apart so callers can react differently.
"""


class AlgThermoError(Exception):
    pass


class ValidationError(AlgThermoError, ValueError):
    pass


class RegionError(ValidationError):
    """Parameters outside the region where the requested result is valid."""


class NumericalConditionError(AlgThermoError, ArithmeticError):
    pass


class IllConditionedError(NumericalConditionError):
    def __init__(self, message, condition_number):
        self.condition_number = condition_number
        super().__init__(f"{message} (condition number {condition_number:.3g})")


class ConvergenceError(NumericalConditionError):
    def __init__(self, message, last_iterate=None):
        self.last_iterate = last_iterate
        super().__init__(message)
