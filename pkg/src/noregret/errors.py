"""Exception types shared across the package."""


class ContractViolation(ValueError):
    """An operation was called with arguments outside its contract."""


class ConfigError(ValueError):
    """Invalid experiment or instance configuration.

    Carries the offending key so the CLI can name it in diagnostics.
    """

    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key


class SolverError(RuntimeError):
    """An iterative solver failed to reach its tolerance.

    Attributes:
        best: the best iterate found before giving up.
        residual: the residual at that iterate.
    """

    def __init__(self, message, best=None, residual=None):
        super().__init__(message)
        self.best = best
        self.residual = residual
