"""Exception types raised across the package."""


class ThermospecError(Exception):
    """Base class for all package errors."""


class ReducibleMatrix(ThermospecError):
    """No path exists from symbol ``i`` to symbol ``j``."""

    def __init__(self, i, j):
        self.i, self.j = i, j
        super().__init__(f"transition matrix is reducible: no path {i} -> {j}")


class EmptyRowOrColumn(ThermospecError):
    """Symbol ``i`` has no outgoing or no incoming transition."""

    def __init__(self, i):
        self.i = i
        super().__init__(f"symbol {i} has an empty row or column")


class InadmissibleWord(ThermospecError):
    pass


class WordTooShort(ThermospecError):
    pass


class StreamExhausted(ThermospecError):
    pass


class ConvergenceFailure(ThermospecError):
    def __init__(self, iterations, residual):
        self.iterations, self.residual = iterations, residual
        super().__init__(
            f"Perron iteration did not converge after {iterations} iterations "
            f"(relative residual {residual:.3e})")


class SingularSystem(ThermospecError):
    pass


class NotZeroPressure(ThermospecError):
    def __init__(self, pressure, tol):
        self.pressure, self.tol = pressure, tol
        super().__init__(f"potential has pressure {pressure:.3e}, expected |P| <= {tol:.1e}")


class BracketingFailure(ThermospecError):
    pass


class DegenerateSpectrum(ThermospecError):
    pass


class InfeasibleConstraint(ThermospecError):
    pass


class EqualRatios(ThermospecError):
    pass


class ConfigError(ThermospecError):
    """Invalid run configuration; ``where`` names the offending field or line."""

    def __init__(self, message, where=None):
        self.where = where
        super().__init__(f"{where}: {message}" if where else message)
