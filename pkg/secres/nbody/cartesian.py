"""
Heliocentric Cartesian states of the planar two-planet problem.

The canonical momentum conjugate to the heliocentric position r_j is stored
through w_j = p_j / beta_j (beta_j the reduced mass), which keeps massless
planets well defined. The osculating orbit of planet j is the Kepler orbit
of (r_j, w_j) around G (m0 + m_j), consistent with the Poincare actions.
"""
from dataclasses import dataclass, replace

import numpy as np

from kepler.elements import G, OrbitalElements, TWO_PI, gm, reduced_mass

from .kepler_solver import kepler_solve


@dataclass(frozen=True)
class CartesianState:
    """Positions r and scaled momenta w, both shaped (2 planets, 2 components)."""
    t: float
    r: np.ndarray
    w: np.ndarray
    masses: tuple

    @property
    def beta(self):
        m0, m1, m2 = self.masses
        return np.array([reduced_mass(m0, m1), reduced_mass(m0, m2)])

    @property
    def momenta(self):
        return self.beta[:, None] * self.w

    def at(self, t, r, w):
        return replace(self, t=t, r=r, w=w)


def _rotate(x, y, angle):
    c, s = np.cos(angle), np.sin(angle)
    return c * x - s * y, s * x + c * y


def orbit_position_velocity(mu, a, e, M, omega):
    """Position and velocity on a Kepler orbit, vectorized over the element arrays."""
    E = kepler_solve(M, e)
    cos_E, sin_E = np.cos(E), np.sin(E)
    root = np.sqrt(1.0 - e ** 2)
    n = np.sqrt(mu / a ** 3)
    x = a * (cos_E - e)
    y = a * root * sin_E
    factor = a * n / (1.0 - e * cos_E)
    vx = -factor * sin_E
    vy = factor * root * cos_E
    rx, ry = _rotate(x, y, omega)
    wx, wy = _rotate(vx, vy, omega)
    return np.stack([rx, ry], axis=-1), np.stack([wx, wy], axis=-1)


def elements_to_cartesian(entry, t=0.0):
    """Initial Cartesian state of a catalog entry."""
    entry.validate()
    m0 = entry.m0
    mu = np.array([gm(m0, p.m) for p in entry.planets])
    a = np.array([p.a for p in entry.planets])
    e = np.array([p.e for p in entry.planets])
    M = np.array([p.M for p in entry.planets])
    omega = np.array([p.omega for p in entry.planets])
    r, w = orbit_position_velocity(mu, a, e, M, omega)
    return CartesianState(t=t, r=r, w=w, masses=entry.masses)


def orbit_elements(mu, r, w):
    """
    Osculating elements of (r, w) around mu. Arrays are shaped (..., 2).
    Returns (a, e, M, omega, bound) with bound False where the orbit is open.
    """
    r = np.asarray(r, dtype=float)
    w = np.asarray(w, dtype=float)
    radius = np.hypot(r[..., 0], r[..., 1])
    speed2 = w[..., 0] ** 2 + w[..., 1] ** 2
    radial = r[..., 0] * w[..., 0] + r[..., 1] * w[..., 1]
    energy = 0.5 * speed2 - mu / radius
    bound = energy < 0
    a = np.where(bound, -mu / (2.0 * np.where(bound, energy, -1.0)), np.nan)
    ex = ((speed2 - mu / radius) * r[..., 0] - radial * w[..., 0]) / mu
    ey = ((speed2 - mu / radius) * r[..., 1] - radial * w[..., 1]) / mu
    e = np.hypot(ex, ey)
    bound &= e < 1
    omega = np.where(e > 0, np.mod(np.arctan2(ey, ex), TWO_PI), 0.0)
    true_longitude = np.arctan2(r[..., 1], r[..., 0])
    safe_a = np.where(bound, a, 1.0)
    safe_e = np.where(e > 0, e, 1.0)
    cos_E = (1.0 - radius / safe_a) / safe_e
    sin_E = radial / (safe_e * np.sqrt(mu * safe_a))
    E = np.arctan2(sin_E, cos_E)
    M = np.where(e > 0, E - e * np.sin(E), np.mod(true_longitude - omega, TWO_PI))
    return a, e, np.mod(M, TWO_PI), omega, bound


def cartesian_to_elements(state):
    """Osculating elements of both planets, plus the mask of bound orbits."""
    m0, m1, m2 = state.masses
    mu = np.array([gm(m0, m1), gm(m0, m2)])
    a, e, M, omega, bound = orbit_elements(mu, state.r, state.w)
    return OrbitalElements(a=a, e=e, M=M, omega=omega), bound


def energy(state):
    """Total heliocentric Hamiltonian: Kepler parts plus T1 and U1."""
    m0, m1, m2 = state.masses
    beta = state.beta
    mu = np.array([gm(m0, m1), gm(m0, m2)])
    radius = np.hypot(state.r[:, 0], state.r[:, 1])
    kepler = np.sum(beta * (0.5 * np.sum(state.w ** 2, axis=1) - mu / radius))
    p = state.momenta
    coupling = np.dot(p[0], p[1]) / m0
    separation = np.hypot(*(state.r[0] - state.r[1]))
    return float(kepler + coupling - G * m1 * m2 / separation)


def angular_momentum(state):
    p = state.momenta
    return float(np.sum(state.r[:, 0] * p[:, 1] - state.r[:, 1] * p[:, 0]))
