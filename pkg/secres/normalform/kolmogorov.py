"""
Secular Hamiltonians at order one and two in the masses.

Order one averages the expanded Hamiltonian over the fast angles at L = 0.
Order two first removes, by two Lie transforms, the fast-angle dependence of
the terms of degree 0 and 1 in L (restricted to 0 < |k|_1 <= K_F and
secular degree <= K_S), keeping terms up to mu^2, and then averages.

Generating functions already carry their factor mu: ``chi1`` and ``chi2``
are the complete functions mu chi_1, mu chi_2 of the transformation

    T = exp(L_chi2) o exp(L_chi1).
"""
import logging
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from kepler.elements import PoincareState
from proximity.delta import choose_rho, delta_parameter
from series.conf import tunable
from series.core import (
    PoissonSeries, angle_average, bracket_with_angle, evaluate, fourier_slice, lie_exp,
    lie_increment, partial_derivative, poisson_bracket, restrict_L, restrict_sec, scale,
    series_sum, solve_angle_homological,
)
from series.exceptions import NotNearIdentityError

from .graded import GradedSeries, graded_lie_exp

logger = logging.getLogger(__name__)

HOMOLOGICAL_RTOL = 1e-13


@dataclass(frozen=True)
class SecularHamiltonian:
    """Average over the fast angles at L = 0; a series in (xi, eta) only."""
    series: PoissonSeries
    order: int
    kepler_constant: float = 0.0
    provenance: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        s = self.series
        if len(s) and (np.any(s.exps[:, :2]) or np.any(s.exps[:, 6:])):
            raise ValueError('a secular Hamiltonian depends on (xi, eta) only')
        if np.any(s.sec_degree % 2):
            raise ValueError('secular Hamiltonian has a term of odd degree in (xi, eta)')

    @property
    def constant(self):
        return self.series.coefficient()

    def coefficient(self, p=(0, 0), q=(0, 0)):
        return self.series.coefficient(p=p, q=q)

    def evaluate(self, xi, eta):
        return evaluate(self.series, xi=xi, eta=eta)


@dataclass(frozen=True, eq=False)
class GeneratingPair:
    chi1: PoissonSeries
    chi2: PoissonSeries
    resonance: object
    near_identity_metric: float
    policy: object
    Lambda_star: np.ndarray
    rho: tuple = None

    @property
    def is_identity(self):
        return self.chi1.is_zero() and self.chi2.is_zero()

    def _map(self, chi):
        return LieMap(chi, self.policy, tunable('LIE_ORDER_CAP'), rho=self.rho)

    @cached_property
    def maps(self):
        return tuple(self._map(chi) for chi in (self.chi1, self.chi2))

    @cached_property
    def inverse_maps(self):
        return tuple(self._map(scale(chi, -1.0)) for chi in (self.chi1, self.chi2))


@dataclass(frozen=True, eq=False)
class NormalizedHamiltonian:
    """The Hamiltonian after exp(L_chi2) o exp(L_chi1), split by order in the masses."""
    graded: GradedSeries
    policy: object
    second_policy: object
    Lambda_star: np.ndarray
    n_star: np.ndarray
    kepler_constant: float

    @property
    def series(self):
        return self.graded.total(self.policy)


class LieMap:
    """
    The map of one Lie transform on coordinates: the new value of every
    variable is the Lie series exp(L_chi) of its coordinate function.
    """

    def __init__(self, chi, policy, order_cap, rho=None):
        self.identity = chi.is_zero()
        self.increments = {}
        if self.identity:
            return
        tolerance = tunable('LIE_TOLERANCE')

        def increment(first):
            return lie_increment(chi, first, order_cap, policy, rho, tolerance)

        for j in (1, 2):
            self.increments[f'lambda{j}'] = increment(bracket_with_angle(chi, j))
            for name in (f'L{j}', f'xi{j}', f'eta{j}'):
                variable = PoissonSeries.variable(name, policy)
                self.increments[name] = increment(poisson_bracket(chi, variable, policy))

    def __call__(self, state, Lambda_star):
        if self.identity:
            return state
        L = state.translated(Lambda_star)
        at = dict(L=L, lam=state.lam, xi=state.xi, eta=state.eta)

        def shift(name):
            return evaluate(self.increments[name], **at)

        def pair(prefix):
            return np.stack([shift(f'{prefix}1'), shift(f'{prefix}2')]).reshape(np.shape(state.xi))

        return PoincareState(
            Lambda=state.Lambda + pair('L'),
            lam=state.lam + pair('lambda'),
            xi=state.xi + pair('xi'),
            eta=state.eta + pair('eta'),
        )


def average_order1(H):
    """Secular Hamiltonian at order one: average of H at L = 0."""
    series = angle_average(restrict_L(H.series, 0))
    logger.info('Order-one secular Hamiltonian: %d terms', len(series))
    return SecularHamiltonian(
        series=series, order=1, kepler_constant=H.kepler_constant,
        provenance={'policy': H.policy},
    )


def solve_homological(f, n_star, K_F, K_S):
    """
    chi with sum_j n*_j d(chi)/d(lambda_j) + f_sliced = 0, where f_sliced keeps
    the harmonics 0 < |k|_1 <= K_F of secular degree <= K_S.
    """
    sliced = restrict_sec(fourier_slice(f, K_F), max_degree=K_S)
    if sliced.is_zero():
        return sliced
    chi = solve_angle_homological(sliced, n_star, tunable('DIVISOR_FLOOR'))
    residual = series_sum(
        [scale(partial_derivative(chi, f'lambda{j}'), n_star[j - 1]) for j in (1, 2)] + [sliced],
        sliced.policy,
    )
    if residual.max_abs() > HOMOLOGICAL_RTOL * sliced.max_abs():
        raise ArithmeticError(f'homological residual {residual.max_abs():.3e} is not zero')
    return chi


def norm_radii(H, scale=None):
    """Polydisk radii of the initial state; a circular orbit gets the radius of e = CIRCULAR_RADIUS_E."""
    e = tunable('CIRCULAR_RADIUS_E')
    floor = np.sqrt(2.0 * H.Lambda_star * (1.0 - np.sqrt(1.0 - e * e)))
    return choose_rho(H.entry, scale=scale, floor=floor)


def _check_near_identity(chi1, H, rho):
    if chi1.is_zero():
        return 0.0
    metric = delta_parameter(chi1, rho)
    refuse = tunable('NEAR_IDENTITY_REFUSE')
    if metric > refuse:
        raise NotNearIdentityError(metric, refuse)
    if metric > tunable('NEAR_IDENTITY_WARN'):
        logger.warning(
            '%s: order-two transformation is far from the identity (delta = %.3e)',
            H.entry.name, metric,
        )
    return metric


def averaged_policy(policy):
    """
    Truncation of the mu^2 terms to what average_order2 reads: L-degree 0,
    harmonic 0. Grade-2 terms enter no later bracket, so the average and the
    generating functions come out the same as with the full policy.
    """
    return policy.with_bounds(max_L_degree=0, max_trig_degree=0)


def kolmogorov_order2(H, resonance, rho=None, second_policy=None, check_identity=True):
    """
    Normalize H to order two in the masses.

    ``second_policy`` truncates the mu^2 terms, by default like every other
    grade. Pass ``averaged_policy(H.policy)`` when only the secular average
    or the generating functions are wanted. Returns the NormalizedHamiltonian
    and its GeneratingPair.
    """
    policy = H.policy
    second_policy = second_policy or policy
    policies = {0: policy, 1: policy, 2: second_policy}
    K_F, K_S = resonance.K_F, resonance.K_S
    n_star = H.n_star

    chi1 = solve_homological(restrict_L(H.pert, 0), n_star, K_F, K_S)
    if H.pert.is_zero():
        rho = None
    elif rho is None:
        rho = norm_radii(H)
    else:
        rho = tuple(float(r) for r in rho)
    metric = _check_near_identity(chi1, H, rho) if check_identity else float('nan')
    start = GradedSeries({0: H.kepler, 1: H.pert})
    transformed = graded_lie_exp(chi1, start, policies)

    chi2 = solve_homological(restrict_L(transformed.part(1, policy), 1), n_star, K_F, K_S)
    normalized = graded_lie_exp(chi2, transformed, policies)
    logger.info(
        '%s: order-two normalization with K_F=%d, K_S=%d: chi1 %d terms, chi2 %d terms, %s',
        H.entry.name, K_F, K_S, len(chi1), len(chi2), normalized,
    )
    gen = GeneratingPair(
        chi1=chi1, chi2=chi2, resonance=resonance, near_identity_metric=metric,
        policy=policy, Lambda_star=H.Lambda_star, rho=rho,
    )
    H_O2 = NormalizedHamiltonian(
        graded=normalized, policy=policy, second_policy=second_policy,
        Lambda_star=H.Lambda_star, n_star=n_star, kepler_constant=H.kepler_constant,
    )
    return H_O2, gen


def average_order2(H_O2, resonance=None):
    """Secular Hamiltonian at order two: the mu and mu^2 parts at L = 0, averaged."""
    pieces = [
        angle_average(restrict_L(H_O2.graded[g], 0))
        for g in (1, 2) if H_O2.graded[g] is not None
    ]
    series = series_sum(pieces, H_O2.policy)
    provenance = {'policy': H_O2.policy}
    if resonance is not None:
        provenance.update(K_F=resonance.K_F, K_S=resonance.K_S)
    logger.info('Order-two secular Hamiltonian: %d terms', len(series))
    return SecularHamiltonian(
        series=series, order=2, kepler_constant=H_O2.kepler_constant, provenance=provenance,
    )


def transform_series(gen, f, inverse=False):
    """exp(L_chi2) exp(L_chi1) f, or its inverse."""
    order_cap = tunable('LIE_ORDER_CAP')
    tolerance = tunable('LIE_TOLERANCE')
    chis = (scale(gen.chi2, -1.0), scale(gen.chi1, -1.0)) if inverse else (gen.chi1, gen.chi2)
    for chi in chis:
        f = lie_exp(chi, f, order_cap, gen.policy, gen.rho, tolerance)
    return f


def apply_T_O2(gen, target, inverse=False):
    """
    The order-two transformation on a PoincareState or on a series.

    On states the forward map takes normalized variables to the original
    ones; ``inverse`` goes from original to normalized variables.
    """
    if isinstance(target, PoissonSeries):
        return transform_series(gen, target, inverse=inverse)
    if gen.is_identity:
        return target
    first, second = gen.maps
    if inverse:
        back1, back2 = gen.inverse_maps
        return back2(back1(target, gen.Lambda_star), gen.Lambda_star)
    return first(second(target, gen.Lambda_star), gen.Lambda_star)
