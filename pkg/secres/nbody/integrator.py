"""
Direct integration of the planar three-body problem in heliocentric
canonical variables,

    H = sum_j beta_j (w_j^2 / 2 - mu_j / r_j) + p1.p2 / m0 - G m1 m2 / |r1 - r2|,

split into the Kepler part A, flowed exactly with the f and g functions, and
the perturbation B, whose flow is the symmetric product
drift(p1.p2 / m0, h/2) kick(G m1 m2 / |r1 - r2|, h) drift(p1.p2 / m0, h/2).
"""
import csv
import logging
from dataclasses import dataclass
from math import ceil, sqrt

import numpy as np

from kepler.elements import G, gm, reduced_mass
from propagation.chain import NUMERIC, SecularTrajectory, check_uniform
from series.conf import tunable
from series.exceptions import CloseEncounterError, DomainError

from .cartesian import angular_momentum, elements_to_cartesian, energy, orbit_elements
from .kepler_solver import kepler_solve

logger = logging.getLogger(__name__)

# symmetric stage sequences: ('A', c) Kepler flow, ('B', d) perturbation flow
SCHEMES = {
    'SBAB3': (
        ('B', 1.0 / 12.0),
        ('A', 0.5 - sqrt(5.0) / 10.0),
        ('B', 5.0 / 12.0),
        ('A', sqrt(5.0) / 5.0),
        ('B', 5.0 / 12.0),
        ('A', 0.5 - sqrt(5.0) / 10.0),
        ('B', 1.0 / 12.0),
    ),
    'leapfrog': (
        ('B', 0.5),
        ('A', 1.0),
        ('B', 0.5),
    ),
}
MIN_STEPS_PER_PERIOD = 20
ENERGY_WARN = 1e-6


def inner_period(entry):
    planet = entry.planet(1)
    return 2.0 * np.pi * sqrt(planet.a ** 3 / gm(entry.m0, planet.m))


@dataclass(frozen=True)
class IntegratorConfig:
    scheme: str
    dt: float
    t_end: float
    stride: int = 1

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f'unknown scheme {self.scheme!r}; choose one of {", ".join(SCHEMES)}')
        if not self.dt > 0:
            raise ValueError('dt must be positive')
        if not self.t_end > 0:
            raise ValueError('t_end must be positive')
        if int(self.stride) != self.stride or self.stride < 1:
            raise ValueError('stride must be a positive integer')

    @property
    def steps(self):
        return int(round(self.t_end / self.dt))

    def validate(self, entry):
        limit = inner_period(entry) / MIN_STEPS_PER_PERIOD
        if self.dt > limit * (1 + 1e-12):
            raise ValueError(f'dt = {self.dt:.6g} yr exceeds one twentieth of the inner period ({limit:.6g} yr)')
        return self


def config_for_grid(entry, times, scheme='SBAB3', steps_per_period=None):
    """Step and stride that put a sample on every point of a uniform grid starting at 0."""
    times = check_uniform(times)
    if times[0] != 0.0:
        raise ValueError('the sampling grid must start at t = 0')
    steps_per_period = steps_per_period or tunable('STEPS_PER_INNER_PERIOD')
    spacing = times[1] - times[0]
    stride = max(1, ceil(spacing / (inner_period(entry) / steps_per_period)))
    return IntegratorConfig(scheme=scheme, dt=spacing / stride, t_end=float(times[-1]), stride=stride)


def kepler_drift(r, w, mu, dt):
    """Exact Kepler flow over dt of every planet, through the f and g functions."""
    r0 = np.hypot(r[:, 0], r[:, 1])
    v2 = np.sum(w ** 2, axis=1)
    rv = np.sum(r * w, axis=1)
    inverse_a = 2.0 / r0 - v2 / mu
    if np.any(inverse_a <= 0):
        raise DomainError('unbound osculating orbit in the Kepler drift')
    a = 1.0 / inverse_a
    n = np.sqrt(mu * inverse_a ** 3)
    ec = 1.0 - r0 * inverse_a
    es = rv / np.sqrt(mu * a)
    E0 = np.arctan2(es, ec)
    dE = kepler_solve(E0 - es + n * dt, np.hypot(ec, es)) - E0
    c, s = np.cos(dE), np.sin(dE)
    f = 1.0 - a / r0 * (1.0 - c)
    g = dt + (s - dE) / n
    r1 = a * (1.0 - ec * c + es * s)
    f_dot = -np.sqrt(mu * a) * s / (r1 * r0)
    g_dot = 1.0 - a / r1 * (1.0 - c)
    return f[:, None] * r + g[:, None] * w, f_dot[:, None] * r + g_dot[:, None] * w


class Stepper:
    """One step of a splitting scheme on (r, w) arrays shaped (2, 2)."""

    def __init__(self, masses, scheme):
        m0, m1, m2 = masses
        self.m0 = m0
        self.mu = np.array([gm(m0, m1), gm(m0, m2)])
        self.beta = np.array([reduced_mass(m0, m1), reduced_mass(m0, m2)])
        # w_j kick strength G m_k / beta_j * m_j
        self.pull = np.array([G * m2 * (m0 + m1) / m0, G * m1 * (m0 + m2) / m0])
        self.stages = SCHEMES[scheme]
        self.close = tunable('CLOSE_ENCOUNTER_AU')

    def drift(self, r, w, h):
        shift = np.stack([self.beta[1] * w[1], self.beta[0] * w[0]]) * (h / self.m0)
        return r + shift

    def kick(self, r, w, h, t):
        d = r[0] - r[1]
        distance = float(np.hypot(d[0], d[1]))
        if distance < self.close:
            raise CloseEncounterError(t, distance)
        pull = d * (h / distance ** 3)
        return np.stack([w[0] - self.pull[0] * pull, w[1] + self.pull[1] * pull])

    def perturbation(self, r, w, h, t):
        if not np.any(self.pull):
            return r, w
        r = self.drift(r, w, h / 2)
        w = self.kick(r, w, h, t)
        return self.drift(r, w, h / 2), w

    def __call__(self, r, w, dt, t):
        for kind, weight in self.stages:
            if kind == 'A':
                r, w = kepler_drift(r, w, self.mu, weight * dt)
            else:
                r, w = self.perturbation(r, w, weight * dt, t)
        return r, w


def advance(state, dt, steps, scheme='SBAB3'):
    """CartesianState after ``steps`` steps of size dt (negative dt runs backwards)."""
    stepper = Stepper(state.masses, scheme)
    r, w, t = state.r.copy(), state.w.copy(), state.t
    for _ in range(int(steps)):
        r, w = stepper(r, w, dt, t)
        t += dt
    return state.at(t, r, w)


@dataclass(frozen=True, eq=False)
class NumericRun:
    trajectory: SecularTrajectory
    energy_times: np.ndarray
    rel_energy_err: np.ndarray
    angular_momentum_err: float
    final: object
    flagged: np.ndarray

    @property
    def max_energy_error(self):
        return float(np.max(np.abs(self.rel_energy_err)))


def _relative(value, reference):
    return (value - reference) / abs(reference) if reference else value - reference


def integrate(entry, cfg):
    """Integrate ``entry`` with ``cfg`` and sample its osculating elements."""
    cfg.validate(entry)
    state = elements_to_cartesian(entry)
    stepper = Stepper(state.masses, cfg.scheme)
    mu = stepper.mu
    E0, L0 = energy(state), angular_momentum(state)
    samples = cfg.steps // cfg.stride + 1
    logger.info(
        '%s: %s integration over %.6g yr, dt = %.6g yr, %d samples',
        entry.name, cfg.scheme, cfg.t_end, cfg.dt, samples,
    )

    e = np.empty((2, samples))
    omega = np.empty((2, samples))
    bound = np.empty((2, samples), dtype=bool)
    rel_energy = np.empty(samples)
    worst_L = 0.0
    r, w, t = state.r.copy(), state.w.copy(), 0.0
    for index in range(samples):
        if index:
            for _ in range(cfg.stride):
                r, w = stepper(r, w, cfg.dt, t)
                t += cfg.dt
        _, e[:, index], _, omega[:, index], bound[:, index] = orbit_elements(mu, r, w)
        current = state.at(t, r, w)
        rel_energy[index] = _relative(energy(current), E0)
        worst_L = max(worst_L, abs(_relative(angular_momentum(current), L0)))

    flagged = ~bound.all(axis=0)
    if np.any(flagged):
        logger.warning('%s: %d samples with an unbound osculating orbit', entry.name, int(flagged.sum()))
        e[:, flagged] = np.nan
    times = np.arange(samples) * cfg.stride * cfg.dt
    run = NumericRun(
        trajectory=SecularTrajectory(
            times=times, e1=e[0], e2=e[1], dpomega=np.unwrap(omega[0] - omega[1]), source=NUMERIC,
        ),
        energy_times=times,
        rel_energy_err=rel_energy,
        angular_momentum_err=worst_L,
        final=state.at(t, r, w),
        flagged=flagged,
    )
    if run.max_energy_error > ENERGY_WARN:
        logger.warning('%s: relative energy error reached %.3e', entry.name, run.max_energy_error)
    else:
        logger.debug('%s: relative energy error %.3e', entry.name, run.max_energy_error)
    return run


def oscillation_period(times, values):
    """Mean spacing of the upward zero crossings of values - mean (nan below two crossings)."""
    times = np.asarray(times, dtype=float)
    x = np.asarray(values, dtype=float)
    x = x - np.nanmean(x)
    upward = np.nonzero((x[:-1] < 0) & (x[1:] >= 0))[0]
    if len(upward) < 2:
        return float('nan')
    crossings = times[upward] - x[upward] * (times[upward + 1] - times[upward]) / (x[upward + 1] - x[upward])
    return float((crossings[-1] - crossings[0]) / (len(crossings) - 1))


def write_energy_log(run, stream):
    writer = csv.writer(stream, lineterminator='\n')
    writer.writerow(('t_yr', 'rel_energy_err'))
    for t, err in zip(run.energy_times, run.rel_energy_err):
        writer.writerow(['%.17g' % t, '%.17g' % err])
