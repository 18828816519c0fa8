"""Exception hierarchy shared by every module."""


class OptostaError(Exception):
    """Base class for all errors raised by optosta."""


class InvalidArgumentError(OptostaError, ValueError):
    pass


class DegenerateCouplingError(OptostaError, ValueError):
    """Both couplings vanish, so the dark/bright mode split is undefined."""


class UnsupportedConfigurationError(OptostaError, ValueError):
    pass


class OutOfRangeError(OptostaError, ValueError):
    pass


class SingularAngleError(OptostaError, ValueError):
    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class DivergenceError(OptostaError, ArithmeticError):
    def __init__(self, message, last_good_time):
        super().__init__(message)
        self.last_good_time = last_good_time


class AccuracyError(OptostaError, ArithmeticError):
    def __init__(self, message, estimate, trajectory=None):
        super().__init__(message)
        self.estimate = estimate
        self.trajectory = trajectory


class DomainError(OptostaError, ValueError):
    def __init__(self, message, radicand=None, parameters=None):
        super().__init__(message)
        self.radicand = radicand
        self.parameters = parameters or {}


class ConfigError(OptostaError, ValueError):
    def __init__(self, message, field=None, line=None):
        super().__init__(message)
        self.field = field
        self.line = line
