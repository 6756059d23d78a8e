"""Exception types raised across the package."""


class InvalidArgumentError(ValueError):
    """An argument has the wrong shape, sign or structure."""


class ConvergenceError(RuntimeError):
    """An iterative solver stopped at its iteration cap.

    The best iterate and its optimality residual are kept on the exception
    so callers can decide whether the answer is still usable.
    """

    def __init__(self, message, residual=None, best=None, value=None):
        super().__init__(message)
        self.residual = residual
        self.best = best
        self.value = value


class ContractViolationError(RuntimeError):
    """A stateful object was driven outside its lifetime contract."""


class ConfigurationError(RuntimeError):
    """The problem setup breaks a standing assumption (e.g. the gradient bound)."""
