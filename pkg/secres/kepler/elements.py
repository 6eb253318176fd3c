"""
Two-planet systems, their osculating elements and Poincare variables.

Units are AU, years and solar masses, so that G = 4 pi^2 and mean motions
come out in rad/yr. Angles are radians everywhere except in the catalog file.

The secular pair of each planet is

    xi  = sqrt(2 Gamma) cos(varpi)
    eta = sqrt(2 Gamma) sin(varpi),     Gamma = Lambda (1 - sqrt(1 - e^2))

which makes (xi, eta) a canonical coordinate/momentum pair with {xi, eta} = 1.
"""
from dataclasses import dataclass, field, replace

import numpy as np

from series.exceptions import DomainError

G = 4.0 * np.pi ** 2
# Jupiter mass in solar masses
MJUP = 9.547919e-4
TWO_PI = 2.0 * np.pi


def reduced_mass(m0, m):
    return m0 * m / (m0 + m)


def gm(m0, m):
    return G * (m0 + m)


def mean_motion(m0, m, a):
    return np.sqrt(gm(m0, m) / np.asarray(a, dtype=float) ** 3)


def lambda_from_a(m0, m, a):
    return reduced_mass(m0, m) * np.sqrt(gm(m0, m) * np.asarray(a, dtype=float))


def a_from_lambda(m0, m, Lambda):
    beta = reduced_mass(m0, m)
    return np.asarray(Lambda, dtype=float) ** 2 / (beta ** 2 * gm(m0, m))


@dataclass(frozen=True)
class PlanetElements:
    """Osculating heliocentric elements of one planet (radians, AU, solar masses)."""
    m: float
    a: float
    e: float
    M: float
    omega: float


@dataclass(frozen=True)
class SystemEntry:
    """A star with two planets; index 1 is the inner planet."""
    name: str
    m0: float
    planets: tuple
    provenance: str = field(default='', compare=False)

    def __post_init__(self):
        if len(self.planets) != 2:
            raise DomainError(f'{self.name}: exactly two planets are supported')

    @property
    def masses(self):
        return (self.m0, self.planets[0].m, self.planets[1].m)

    @property
    def mu(self):
        return max(self.planets[0].m, self.planets[1].m) / self.m0

    @property
    def alpha(self):
        return self.planets[0].a / self.planets[1].a

    def planet(self, index):
        return self.planets[index - 1]

    def replace_planet(self, index, **changes):
        planets = list(self.planets)
        planets[index - 1] = replace(planets[index - 1], **changes)
        return replace(self, planets=tuple(planets))

    def swapped(self):
        """The same system with the planet labels exchanged."""
        return replace(self, planets=(self.planets[1], self.planets[0]))

    def validate(self):
        if not self.m0 > 0:
            raise DomainError(f'{self.name}: star mass must be positive')
        for index, planet in enumerate(self.planets, start=1):
            if planet.m < 0:
                raise DomainError(f'{self.name}: planet {index} has a negative mass')
            if not planet.a > 0:
                raise DomainError(f'{self.name}: planet {index} semi-major axis must be positive')
            if not 0 <= planet.e < 1:
                raise DomainError(f'{self.name}: planet {index} eccentricity {planet.e} outside [0, 1)')
        return self


@dataclass(frozen=True)
class PoincareState:
    """
    Poincare variables of both planets. Each field is a length-2 array, or a
    (2, n) array for a batch of states.
    """
    Lambda: np.ndarray
    lam: np.ndarray
    xi: np.ndarray
    eta: np.ndarray

    def translated(self, Lambda_star):
        """Fast actions relative to the reference ones, L = Lambda - Lambda*."""
        return self.Lambda - np.asarray(Lambda_star, dtype=float).reshape(2, *([1] * (self.Lambda.ndim - 1)))


@dataclass(frozen=True)
class OrbitalElements:
    """Elements of both planets as arrays indexed like PoincareState."""
    a: np.ndarray
    e: np.ndarray
    M: np.ndarray
    omega: np.ndarray


def _column(values, shape_like):
    return np.asarray(values, dtype=float).reshape(2, *([1] * (np.ndim(shape_like) - 1)))


def elements_to_poincare(entry):
    """Poincare variables of the catalog elements of ``entry``."""
    entry.validate()
    m0 = entry.m0
    m = np.array([p.m for p in entry.planets])
    a = np.array([p.a for p in entry.planets])
    e = np.array([p.e for p in entry.planets])
    M = np.array([p.M for p in entry.planets])
    omega = np.array([p.omega for p in entry.planets])
    Lambda = lambda_from_a(m0, m, a)
    rho = np.sqrt(2.0 * Lambda * (1.0 - np.sqrt(1.0 - e ** 2)))
    return PoincareState(
        Lambda=Lambda,
        lam=np.mod(M + omega, TWO_PI),
        xi=rho * np.cos(omega),
        eta=rho * np.sin(omega),
    )


def poincare_to_elements(state, masses):
    """Inverse of elements_to_poincare; masses is (m0, m1, m2)."""
    m0, m1, m2 = masses
    m = _column([m1, m2], state.Lambda)
    Lambda = np.asarray(state.Lambda, dtype=float)
    if np.any(Lambda <= 0):
        raise DomainError('Poincare actions must be positive')
    u = (np.asarray(state.xi) ** 2 + np.asarray(state.eta) ** 2) / (2.0 * Lambda)
    if np.any(u >= 1.0):
        raise DomainError('xi^2 + eta^2 must stay below 2 Lambda (e < 1)')
    e = np.sqrt(1.0 - (1.0 - u) ** 2)
    omega = np.where(u > 0, np.mod(np.arctan2(state.eta, state.xi), TWO_PI), 0.0)
    return OrbitalElements(
        a=a_from_lambda(m0, m, Lambda),
        e=e,
        M=np.mod(np.asarray(state.lam) - omega, TWO_PI),
        omega=omega,
    )


def eccentricity_from_secular(Lambda, xi, eta):
    """Eccentricity from the secular pair at fixed Lambda (no domain check)."""
    u = (np.asarray(xi) ** 2 + np.asarray(eta) ** 2) / (2.0 * np.asarray(Lambda))
    return np.sqrt(np.clip(1.0 - (1.0 - u) ** 2, 0.0, None))
