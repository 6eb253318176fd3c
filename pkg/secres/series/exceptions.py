"""Exceptions raised across the secres apps."""


class SecresError(Exception):
    """Base class for every failure a secres pipeline reports."""


class DomainError(SecresError, ValueError):
    """Input outside the domain of a conversion (e >= 1, bad masses, ...)."""


class ResonantDivisorError(SecresError, ArithmeticError):
    """A homological equation met a divisor below the configured floor."""

    def __init__(self, k, divisor, floor):
        self.k = tuple(int(v) for v in k)
        self.divisor = float(divisor)
        self.floor = float(floor)
        super().__init__(
            f'Resonant divisor for harmonic k={self.k}: '
            f'|k.n| = {abs(self.divisor):.3e} is below the floor {self.floor:.1e}'
        )


class NonConvergenceError(SecresError, ArithmeticError):
    """An iterative construction kept growing instead of converging."""


class ExpansionError(SecresError):
    """The expansion of the mutual distance cannot converge for this system."""


class EllipticityError(SecresError):
    """The secular quadratic part is not an elliptic equilibrium."""


class DegenerateRadiusError(SecresError, ValueError):
    """A polydisk radius is zero (circular initial orbit)."""


class CloseEncounterError(SecresError):
    """Two planets came closer than the close-encounter distance."""

    def __init__(self, t, distance):
        self.t = float(t)
        self.distance = float(distance)
        super().__init__(
            f'Close encounter at t = {self.t:.6g} yr: separation {self.distance:.3e} AU'
        )


class NotNearIdentityError(SecresError):
    """The order-two transformation is too far from the identity to be trusted."""

    def __init__(self, delta, limit):
        self.delta = float(delta)
        self.limit = float(limit)
        super().__init__(
            f'Order-two transformation is not near the identity: '
            f'delta = {self.delta:.3e} exceeds {self.limit:.3e}'
        )


class CatalogError(SecresError):
    """A catalog record could not be parsed or validated."""

    def __init__(self, message, line_number=None, path=None):
        self.line_number = line_number
        self.path = path
        where = ''
        if path is not None:
            where = f'{path}:'
        if line_number is not None:
            where = f'{where}{line_number}: '
        elif where:
            where = f'{where} '
        super().__init__(f'{where}{message}')


class RunConfigError(SecresError, ValueError):
    """A run configuration (flags, preset or config file) is invalid."""

    def __init__(self, message, line_number=None, path=None):
        self.line_number = line_number
        self.path = path
        where = f'{path}:{line_number}: ' if path and line_number else (f'{path}: ' if path else '')
        super().__init__(f'{where}{message}')
