"""Exception types raised by chirpsep."""


class DomainError(ValueError):
    """An argument lies outside the domain of an operation."""


class SolverError(RuntimeError):
    """A sparse solver broke down (rank deficiency, non-finite iterates)."""


class ConfigError(ValueError):
    """Invalid experiment configuration.

    ``line`` is the 1-based line of the offending field in the config
    file, or None when it cannot be located.
    """

    def __init__(self, message, line=None, path=None):
        super().__init__(message)
        self.message = message
        self.line = line
        self.path = path

    def __str__(self):
        where = str(self.path) if self.path is not None else "<config>"
        if self.line is not None:
            where = f"{where}:{self.line}"
        return f"{where}: {self.message}"
