"""Exception types shared across the package."""


class DomainError(ValueError):
    """Argument outside the mathematical domain of a function."""


class ConvergenceError(ArithmeticError):
    """A series or iteration hit its term cap before converging."""

    def __init__(self, message, partial_sum=float("nan"), last_term=float("nan")):
        super().__init__(message)
        self.partial_sum = partial_sum
        self.last_term = last_term


class ConsistencyError(ArithmeticError):
    """A computed quantity violates an identity it must satisfy."""


class DegenerateReceiverError(ValueError):
    """IQ coefficients with a vanishing direct-path term."""


class NoFiniteCeilingError(ArithmeticError):
    """The high-SNR SNDR limit has a non-positive denominator."""


class QuadratureError(ArithmeticError):
    """Adaptive quadrature failed to reach the requested tolerance."""

    def __init__(self, message, partial=float("nan"), abserr=float("nan")):
        super().__init__(message)
        self.partial = partial
        self.abserr = abserr


class ConfigError(ValueError):
    """Invalid run configuration; ``field`` names the offending entry."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field
