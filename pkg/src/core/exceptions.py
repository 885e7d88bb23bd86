# src/core/exceptions.py
"""
Error hierarchy. Every error carries the exit code the CLI returns for it.
"""

from typing import Any, Optional


class AdiabaticInversionError(Exception):
    """Base class for all toolkit errors"""

    exit_code = 1


class ConfigurationError(AdiabaticInversionError):
    """Bad command-line flags or configuration keys"""

    exit_code = 2


class InvalidParameterError(AdiabaticInversionError, ValueError):
    """A physical or numerical parameter outside its allowed domain"""

    exit_code = 2


class ParseError(AdiabaticInversionError):
    """Malformed input file"""

    exit_code = 3

    def __init__(self, message: str, path: Optional[str] = None, line: Optional[int] = None):
        self.path = path
        self.line = line
        location = ""
        if path is not None:
            location = f"{path}"
            if line is not None:
                location += f":{line}"
            location += ": "
        super().__init__(f"{location}{message}")


class NumericalError(AdiabaticInversionError):
    """Numerical failure in a simulation or analysis step"""

    exit_code = 4


class IntegrationError(NumericalError):
    """The ODE integrator could not advance (e.g. step size underflow)"""

    def __init__(self, message: str, time: float):
        self.time = time
        super().__init__(f"{message} (t = {time:.6e} s)")


class NumericalInstabilityError(NumericalError):
    """A density-matrix invariant was violated beyond tolerance"""


class NoCrossingError(NumericalError):
    """A sampled curve has no half-maximum crossing on one side"""


class ConvergenceError(AdiabaticInversionError):
    """Optimizer stopped without meeting its convergence criteria"""

    exit_code = 5

    def __init__(self, message: str, result: Any = None):
        self.result = result
        super().__init__(message)


class RankDeficientError(ConvergenceError):
    """The fit Jacobian is rank deficient: some parameter is unresolvable"""
