"""Exception hierarchy shared by the engine and the CLI."""

# Exit 1 is reserved for a failed validation suite.
INTERNAL_ERROR_EXIT = 4


class PauliGaussianError(Exception):
    """Base class for all engine errors."""

    exit_code = INTERNAL_ERROR_EXIT


class ContractViolation(PauliGaussianError, ValueError):
    """Input violates the precondition of a numerical kernel."""

    exit_code = 2


class ParseError(PauliGaussianError, ValueError):
    """Malformed configuration string, basis spec or state file."""

    exit_code = 2

    def __init__(self, message: str, position=None):
        if position is not None:
            message = f"{message} (at {position})"
        super().__init__(message)
        self.position = position


class UsageError(PauliGaussianError):
    """Invalid combination of command-line options."""

    exit_code = 2


class NumericGuardError(PauliGaussianError):
    """A size guard or numerical singularity prevents evaluation."""

    exit_code = 3
