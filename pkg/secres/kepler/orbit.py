"""
Keplerian motion of one planet as series in its Poincare variables.

The complex heliocentric position zeta = x + i y of an ellipse is

    zeta / a = sum_k c_k(e) exp(i (k lambda + (1 - k) varpi))

with c_0 = -3e/2 and, for k >= 1,

    A_k = (J_{k-1}(ke) - J_{k+1}(ke)) / k
    B_k = sqrt(1 - e^2) (J_{k-1}(ke) + J_{k+1}(ke)) / k
    c_k = (A_k + B_k) / 2,   c_{-k} = (A_k - B_k) / 2.

The c_k are expanded as exact rational power series in e, then e and varpi
are traded for Z = xi + i eta = sqrt(2 Gamma) exp(i varpi) and the semi-major
axis for Lambda = Lambda* + L (kept to first order in L).
"""
import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial

import numpy as np

from series.core import COS, SIN, PoissonSeries
from series.exceptions import DomainError

from .elements import gm, reduced_mass

logger = logging.getLogger(__name__)


def _binom(s, n):
    """Generalized binomial coefficient for rational s."""
    value = Fraction(1)
    for i in range(n):
        value *= (s - i) / Fraction(i + 1)
    return value


def _bessel(n, k, degree):
    """Coefficients of J_n(k e) as a polynomial in e, up to e^degree."""
    sign = 1
    if n < 0:
        n = -n
        sign = (-1) ** n
    coeffs = [Fraction(0)] * (degree + 1)
    m = 0
    while 2 * m + n <= degree:
        power = 2 * m + n
        coeffs[power] += sign * Fraction((-1) ** m * k ** power, 2 ** power * factorial(m) * factorial(m + n))
        m += 1
    return coeffs


def _sqrt_one_minus_e2(degree):
    coeffs = [Fraction(0)] * (degree + 1)
    for j in range(degree // 2 + 1):
        coeffs[2 * j] = _binom(Fraction(1, 2), j) * (-1) ** j
    return coeffs


def _poly_mul(a, b, degree):
    out = [Fraction(0)] * (degree + 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b[:degree + 1 - i]):
                out[i + j] += x * y
    return out


@lru_cache(maxsize=None)
def position_coefficients(degree):
    """{k: [c_k coefficients of e^0 .. e^degree]} as Fractions, zero series omitted."""
    sqrt_term = _sqrt_one_minus_e2(degree)
    coefficients = {0: [Fraction(0)] * (degree + 1)}
    if degree >= 1:
        coefficients[0][1] = Fraction(-3, 2)
    for k in range(1, degree + 2):
        lower = _bessel(k - 1, k, degree)
        upper = _bessel(k + 1, k, degree)
        A = [(x - y) / k for x, y in zip(lower, upper)]
        B = _poly_mul(sqrt_term, [(x + y) / k for x, y in zip(lower, upper)], degree)
        coefficients[k] = [(x + y) / 2 for x, y in zip(A, B)]
        coefficients[-k] = [(x - y) / 2 for x, y in zip(A, B)]
    return {k: c for k, c in coefficients.items() if any(c)}


@dataclass(frozen=True)
class ComplexOrbitTerm:
    """coef * Z^a conj(Z)^b * L^l * exp(i k lambda) for one planet."""
    k: int
    a: int
    b: int
    l: int
    coef: complex


@lru_cache(maxsize=None)
def _unit_terms(degree):
    """
    zeta expressed through Z and Lambda before any mass factor:
    tuples (k, a, b, lambda_power, rational coefficient).
    """
    terms = []
    for k, coeffs in position_coefficients(degree).items():
        p = 1 - k
        for power, c in enumerate(coeffs):
            if not c or power < abs(p) or (power - abs(p)) % 2:
                continue
            j = (power - abs(p)) // 2
            s = j + Fraction(abs(p), 2)
            n = 0
            while 2 * (j + n) + abs(p) <= degree:
                weight = c * _binom(s, n) * Fraction(-1, 4) ** n
                if weight:
                    a = j + n + max(p, 0)
                    b = j + n + max(-p, 0)
                    terms.append((k, a, b, s + n, weight))
                n += 1
    return tuple(terms)


def complex_orbit(m0, m, Lambda_star, degree, momentum=False):
    """
    Terms of zeta (or of the conjugate momentum beta * dzeta/dt when
    ``momentum``), linear in L = Lambda - Lambda*.
    """
    beta = reduced_mass(m0, m)
    if beta <= 0:
        raise DomainError('orbit series need a planet with positive mass')
    mu = gm(m0, m)
    terms = []
    for k, a, b, sigma, weight in _unit_terms(degree):
        if momentum:
            if k == 0:
                continue
            gamma = -1.0 - float(sigma)
            base = 1j * k * beta ** 2 * mu
        else:
            gamma = 2.0 - float(sigma)
            base = 1.0 / (beta ** 2 * mu)
        value = complex(base * float(weight) * Lambda_star ** gamma)
        terms.append(ComplexOrbitTerm(k, a, b, 0, value))
        terms.append(ComplexOrbitTerm(k, a, b, 1, value * gamma / Lambda_star))
    return terms


@lru_cache(maxsize=None)
def zpower_expansion(a, b):
    """
    Z^a conj(Z)^b = sum_t w_t xi^(a+b-t) eta^t; returns (t values, complex w_t).
    """
    ts, weights = [], []
    for t in range(a + b + 1):
        total = 0
        for r in range(max(0, t - b), min(a, t) + 1):
            total += comb(a, r) * comb(b, t - r) * (-1) ** (t - r)
        if total:
            ts.append(t)
            weights.append(total * 1j ** t)
    return np.array(ts, dtype=np.int64), np.array(weights, dtype=complex)


def _real_parts(terms, planet_index, policy):
    rows, parities, re_coefs, im_coefs = [], [], [], []
    j = planet_index - 1
    for term in terms:
        ts, weights = zpower_expansion(term.a, term.b)
        for t, w in zip(ts, weights):
            value = term.coef * w
            row = [0] * 8
            row[j] = term.l
            row[2 + j] = term.a + term.b - int(t)
            row[4 + j] = int(t)
            row[6 + j] = term.k
            # Re(value e^{ik lambda}) and Im(value e^{ik lambda})
            rows += [row, row]
            parities += [COS, SIN]
            re_coefs += [value.real, -value.imag]
            im_coefs += [value.imag, value.real]
    rows = np.array(rows, dtype=np.int64).reshape(-1, 8)
    return (
        PoissonSeries(rows, parities, re_coefs, policy),
        PoissonSeries(rows, parities, im_coefs, policy),
    )


@dataclass(frozen=True)
class OrbitSeries:
    """Heliocentric position and conjugate momentum components of one planet."""
    x: PoissonSeries
    y: PoissonSeries
    px: PoissonSeries
    py: PoissonSeries


def kepler_orbit_series(planet_index, policy, m0, m, Lambda_star):
    """
    Real series for the Cartesian position and momentum of planet
    ``planet_index`` in (L_j, lambda_j, xi_j, eta_j), exact to the secular
    degree of ``policy`` and to first order in L_j.
    """
    degree = policy.max_sec_degree
    if degree > 12:
        raise ValueError('orbit series are provided up to secular degree 12')
    x, y = _real_parts(complex_orbit(m0, m, Lambda_star, degree), planet_index, policy)
    px, py = _real_parts(complex_orbit(m0, m, Lambda_star, degree, momentum=True), planet_index, policy)
    logger.debug('Orbit series of planet %d: %d position terms', planet_index, len(x) + len(y))
    return OrbitSeries(x=x, y=y, px=px, py=py)
