"""
The translated, expanded two-planet Hamiltonian

    H = n* . L + sum_j F0''_j L_j^2 / 2 + pert(L, lambda, xi, eta)

around the reference actions Lambda*. ``pert`` is T1 + U1 (momentum coupling
plus mutual attraction) at first order in L, built in the psi-sampled algebra
and converted to a real Poisson series.
"""
import logging
from dataclasses import dataclass

import numpy as np
from scipy.special import binom

from series.conf import tunable
from series.core import PoissonSeries, TruncationPolicy, evaluate, series_add
from series.exceptions import DomainError, ExpansionError

from . import sampled
from .elements import (
    G, PoincareState, a_from_lambda, elements_to_poincare, gm, mean_motion,
    poincare_to_elements, reduced_mass,
)
from .orbit import complex_orbit

logger = logging.getLogger(__name__)

DEFAULT_POLICY = TruncationPolicy(max_L_degree=2, max_sec_degree=12, max_trig_degree=12)


@dataclass(frozen=True)
class ExpandedHamiltonian:
    entry: object
    policy: TruncationPolicy
    Lambda_star: np.ndarray
    n_star: np.ndarray
    kepler: PoissonSeries
    kepler_constant: float
    pert: PoissonSeries
    mu: float
    samples: int = 0

    @property
    def series(self):
        """Keplerian plus perturbing part, without the Keplerian constant."""
        return series_add(self.kepler, self.pert)

    def evaluate(self, state):
        """Numeric value (constant included) at a PoincareState or a batch of them."""
        L = state.translated(self.Lambda_star)
        return self.kepler_constant + evaluate(self.series, L=L, lam=state.lam, xi=state.xi, eta=state.eta)


def kepler_part(m0, masses, Lambda_star, policy):
    """n*.L + F0''.L^2 / 2 and the Keplerian energy at Lambda*."""
    terms, constant = [], 0.0
    n_star = np.zeros(2)
    for index, (m, Lam) in enumerate(zip(masses, Lambda_star), start=1):
        beta = reduced_mass(m0, m)
        n = float(mean_motion(m0, m, a_from_lambda(m0, m, Lam))) if beta > 0 else None
        if n is None:
            continue
        n_star[index - 1] = n
        l = (1, 0) if index == 1 else (0, 1)
        terms.append(PoissonSeries.monomial(n, policy, l=l))
        l2 = (2, 0) if index == 1 else (0, 2)
        terms.append(PoissonSeries.monomial(-1.5 * n / Lam, policy, l=l2))
        constant += -beta ** 3 * gm(m0, m) ** 2 / (2.0 * Lam ** 2)
    kepler = PoissonSeries.zero(policy)
    for term in terms:
        kepler = series_add(kepler, term)
    return kepler, constant, n_star


def perturbation(m0, m1, m2, Lambda_star, policy, samples=None):
    """T1 + U1 as a real Poisson series, linear in L."""
    pert_policy = policy.with_bounds(max_L_degree=min(policy.max_L_degree, 1))
    if m1 * m2 == 0:
        return PoissonSeries.zero(pert_policy), 0
    degree = policy.max_sec_degree
    a_star = (a_from_lambda(m0, m1, Lambda_star[0]), a_from_lambda(m0, m2, Lambda_star[1]))
    alpha = a_star[0] / a_star[1]
    if samples is None:
        samples = sampled.choose_samples(alpha, degree, policy.max_trig_degree)
    space = sampled.key_space(degree)

    z1 = sampled.from_orbit(space, complex_orbit(m0, m1, Lambda_star[0], degree), 1, samples)
    z2 = sampled.from_orbit(space, complex_orbit(m0, m2, Lambda_star[1], degree), 2, samples)
    p1 = sampled.from_orbit(space, complex_orbit(m0, m1, Lambda_star[0], degree, momentum=True), 1, samples)
    p2 = sampled.from_orbit(space, complex_orbit(m0, m2, Lambda_star[1], degree, momentum=True), 2, samples)

    cross = z1 * z2.conjugate()
    distance2 = z1 * z1.conjugate() + z2 * z2.conjugate() - cross - cross.conjugate()
    zero_key = (0, 0, 0, 0, 0, 0)
    delta0_sq = distance2.row(zero_key).real
    if np.min(delta0_sq) <= 0:
        raise ExpansionError('reference circular orbits intersect')
    q = distance2.without_row(zero_key)

    # 1/Delta = sum_s binom(-1/2, s) Delta0^-(2s+1) q^s
    inverse = sampled.SampledSeries(space, [space.index(zero_key)], delta0_sq[None, :] ** -0.5, 0)
    power = q
    for s in range(1, degree + 2):
        if not len(power.rows):
            break
        inverse = inverse + power.times_function(binom(-0.5, s) * delta0_sq ** (-(2 * s + 1) / 2.0))
        if s < degree + 1:
            power = power * q
    coupling = p1 * p2.conjugate()
    h1 = inverse.scale(-G * m1 * m2) + (coupling + coupling.conjugate()).scale(0.5 / m0)
    logger.debug('Sampled perturbation: %d keys on %d psi samples', len(h1.rows), samples)
    return sampled.to_poisson(h1, pert_policy), samples


def expand_hamiltonian(entry, policy=None, Lambda_star=None, samples=None):
    """
    Build the ExpandedHamiltonian of a catalog entry. ``Lambda_star``
    defaults to the initial osculating actions.
    """
    policy = policy or DEFAULT_POLICY
    entry.validate()
    if entry.planets[0].a >= entry.planets[1].a:
        raise DomainError(f'{entry.name}: planet 1 must be the inner planet')
    alpha_max = tunable('ALPHA_MAX')
    if entry.alpha >= alpha_max:
        raise ExpansionError(
            f'{entry.name}: a1/a2 = {entry.alpha:.4f} is not below {alpha_max}; '
            f'the expansion of the mutual distance would not converge'
        )
    m0, m1, m2 = entry.masses
    if Lambda_star is None:
        Lambda_star = elements_to_poincare(entry).Lambda
    Lambda_star = np.asarray(Lambda_star, dtype=float)

    kepler, constant, n_star = kepler_part(m0, (m1, m2), Lambda_star, policy)
    for index, planet in enumerate(entry.planets):
        if n_star[index] == 0:
            n_star[index] = float(mean_motion(m0, planet.m, planet.a))
    pert, grid = perturbation(m0, m1, m2, Lambda_star, policy, samples)
    logger.info(
        '%s: expanded Hamiltonian with %d perturbation terms (policy %s/%s/%s, %d psi samples)',
        entry.name, len(pert), policy.max_L_degree, policy.max_sec_degree, policy.max_trig_degree, grid,
    )
    return ExpandedHamiltonian(
        entry=entry, policy=policy, Lambda_star=Lambda_star, n_star=n_star,
        kepler=kepler, kepler_constant=constant, pert=pert, mu=entry.mu, samples=grid,
    )


def exact_hamiltonian(masses, state):
    """Direct evaluation of the heliocentric Hamiltonian at Poincare states."""
    from nbody.cartesian import orbit_position_velocity

    m0, m1, m2 = masses
    elements = poincare_to_elements(state, masses)
    beta = np.array([reduced_mass(m0, m1), reduced_mass(m0, m2)])
    mu = np.array([gm(m0, m1), gm(m0, m2)])
    shape = (2,) + (1,) * (np.ndim(elements.a) - 1)
    r, w = orbit_position_velocity(
        mu.reshape(shape), elements.a, elements.e, elements.M, elements.omega,
    )
    # r, w: (2, ..., 2)
    p = beta.reshape(shape + (1,)) * w
    radius = np.linalg.norm(r, axis=-1)
    kepler = np.sum(
        np.sum(p ** 2, axis=-1) / (2.0 * beta.reshape(shape)) - G * m0 * np.array([m1, m2]).reshape(shape) / radius,
        axis=0,
    )
    coupling = np.sum(p[0] * p[1], axis=-1) / m0
    separation = np.linalg.norm(r[0] - r[1], axis=-1)
    return kepler + coupling - G * m1 * m2 / separation


def random_states(hamiltonian, count, e_max, rng, L_scale=0.0):
    """Poincare states around the reference actions with e <= e_max, for oracle checks."""
    Lam = hamiltonian.Lambda_star[:, None] * (1.0 + L_scale * rng.uniform(-1, 1, size=(2, count)))
    e = rng.uniform(0.0, e_max, size=(2, count))
    varpi = rng.uniform(0.0, 2 * np.pi, size=(2, count))
    rho = np.sqrt(2.0 * Lam * (1.0 - np.sqrt(1.0 - e ** 2)))
    return PoincareState(
        Lambda=Lam,
        lam=rng.uniform(0.0, 2 * np.pi, size=(2, count)),
        xi=rho * np.cos(varpi),
        eta=rho * np.sin(varpi),
    )
