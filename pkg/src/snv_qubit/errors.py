"""Exception hierarchy shared by the library and the CLI."""


class SnvError(Exception):
    """Base class for expected failures."""


class ConfigError(SnvError, ValueError):
    """Bad or unknown configuration key/value. CLI exit code 1."""


class NumericalError(SnvError, RuntimeError):
    """Solver or fit failure. CLI exit code 2."""


class IntegrationError(NumericalError):
    def __init__(self, message, time_reached):
        super().__init__(f"{message} (integration reached t = {time_reached:.6g} s)")
        self.time_reached = time_reached


class SteadyStateError(NumericalError):
    def __init__(self, null_dimension):
        super().__init__(
            f"steady state is not unique: Liouvillian null space has dimension "
            f"{null_dimension}"
        )
        self.null_dimension = null_dimension


class FitError(NumericalError):
    def __init__(self, message, direction=None):
        super().__init__(message)
        self.direction = direction or {}
