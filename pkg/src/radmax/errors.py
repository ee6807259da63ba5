"""Exception types raised by radmax."""


class RadmaxError(Exception):
    """Base class for all radmax errors."""


class InvalidInput(RadmaxError, ValueError):
    pass


class DivergentMoment(RadmaxError):
    """A moment integral of a profile against t^(n-1) dt is infinite."""


class QuadratureFailure(RadmaxError):
    pass


class BreakpointAtT(RadmaxError):
    pass


class TailNotControlled(RadmaxError):
    pass


class GridTooCoarse(RadmaxError):
    pass


class BudgetExhausted(RadmaxError):
    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class CertificateMissing(RadmaxError):
    pass


class ConfigError(RadmaxError, ValueError):
    pass
