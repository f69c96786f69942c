"""
Errors raised by the package. Each one carries the exit code the command line
interface returns when it escapes a subcommand.
"""


class FasUavError(Exception):
    exit_code = 1


class ConfigError(FasUavError, ValueError):
    """
    Invalid or missing configuration entry.

    Parameters
    ----------
    key : str
        Dotted key path, e.g. ``fas.aperture``.
    message : str
    """

    exit_code = 4

    def __init__(self, key, message):
        self.key = key
        super().__init__(f"{key}: {message}")


class GeometryError(FasUavError, ValueError):
    pass


class DecompositionError(FasUavError, RuntimeError):
    pass


class SubsetCapError(FasUavError, ValueError):
    pass


class CausalityError(FasUavError, ValueError):
    pass


class MonotonicityError(FasUavError, RuntimeError):
    pass


class InfeasibleError(FasUavError, RuntimeError):
    exit_code = 3


class ValidationFailure(FasUavError):
    exit_code = 2
