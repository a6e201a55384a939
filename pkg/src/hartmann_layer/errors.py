"""Exception types raised by the solver, norms, and checks."""


class HartmannError(Exception):
    """Base class for all package errors."""


class UnsupportedOrder(HartmannError, ValueError):
    pass


class InvalidInitialData(HartmannError, ValueError):
    pass


class MagneticRecoveryUnavailable(HartmannError):
    """The far-field deficit U - u is not integrable for the requested decay rate."""


class StepRejected(HartmannError):
    def __init__(self, dt, admissible_dt):
        self.dt = dt
        self.admissible_dt = admissible_dt
        super().__init__(f"dt={dt:g} violates CFL; admissible dt <= {admissible_dt:g}")


class NumericalBlowup(HartmannError):
    def __init__(self, t):
        self.t = t
        super().__init__(f"non-finite values at t={t:g}")


class MonotonicityLost(HartmannError):
    def __init__(self, t, location, value=None):
        self.t = t
        self.location = location
        self.value = value
        super().__init__(f"monotonicity floor violated at t={t:g}, node {location}"
                         + ("" if value is None else f" (weighted w = {value:g})"))


class UnsupportedExponent(HartmannError, ValueError):
    pass


class HypothesisFailed(HartmannError, ValueError):
    pass


class DegenerateInput(HartmannError, ValueError):
    pass


class UnsupportedCase(HartmannError, ValueError):
    pass


class BoundExpired(HartmannError):
    def __init__(self, blowup_time):
        self.blowup_time = blowup_time
        super().__init__(f"a-priori bound expired at t={blowup_time:g}")


class ConfigError(HartmannError, ValueError):
    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)
