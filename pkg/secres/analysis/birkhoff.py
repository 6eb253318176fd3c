"""
Birkhoff normal form of a secular Hamiltonian around its elliptic equilibrium.

Starting from H = nu . I + (terms of degree >= 4 in rho) in action-angle
form, order s removes the angle dependence of the terms of degree s + 2 with
a generating function X_s solving

    nu . dX_s/dphi + (f_s - <f_s>) = 0,    Z_s = <f_s>,

and replaces H by exp(L_X_s) H. Odd orders are empty for an even Hamiltonian.
"""
import logging
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from series.conf import tunable
from series.core import PoissonSeries, angle_average, series_sub, series_sum, solve_angle_homological

from .actionangle import (
    action_derivative, action_lie_exp, action_norm, action_policy, by_degree,
    cartesian, cartesian_functions, evaluate_action_angle, polar, to_action_angle,
)
from .diagonal import diagonalize_quadratic

logger = logging.getLogger(__name__)

GROWTH_WINDOW = 3
DIFFERENCE_RTOL = 1e-6


@dataclass(frozen=True)
class OrderReport:
    order: int
    generator_norm: float
    normal_norm: float
    remainder_norm: float


@dataclass(frozen=True)
class SecularFrequencies:
    phi_dot: np.ndarray
    dpomega_rate: float
    period: float

    def __post_init__(self):
        if self.dpomega_rate != self.phi_dot[0] - self.phi_dot[1]:
            raise ValueError('dpomega_rate must equal phi_dot1 - phi_dot2')


def _cleanup_by_degree(f, tol):
    """Drop coefficients at or below ``tol`` times the largest one of the same degree."""
    if tol <= 0 or not len(f):
        return f
    degree = f.exps[:, 0] + f.exps[:, 1]
    magnitude = np.abs(f.coef)
    largest = np.zeros(degree.max() + 1)
    np.maximum.at(largest, degree, magnitude)
    return f.select(magnitude > tol * largest[degree])


def _growth_start(norms):
    """Order at which the norms started growing for GROWTH_WINDOW consecutive steps."""
    rising = 0
    for index in range(1, len(norms)):
        order, value = norms[index]
        if value > norms[index - 1][1]:
            rising += 1
            if rising >= GROWTH_WINDOW:
                return norms[index - GROWTH_WINDOW][0]
        else:
            rising = 0
    return None


class BirkhoffMap:
    """Cartesian (x, y) -> (x, y) map of one Lie transform in action-angle form."""

    def __init__(self, chi, policy, order_cap):
        self.identity = chi.is_zero()
        self.increments = {}
        if self.identity:
            return
        for name, f in cartesian_functions(policy).items():
            self.increments[name] = series_sub(action_lie_exp(chi, f, order_cap, policy), f)

    def __call__(self, x, y):
        if self.identity:
            return x, y
        rho, phi = polar(x, y)

        def shift(name):
            return evaluate_action_angle(self.increments[name], rho, phi)

        x = np.asarray(x, dtype=float) + np.stack([shift('x1'), shift('x2')]).reshape(np.shape(x))
        y = np.asarray(y, dtype=float) + np.stack([shift('y1'), shift('y2')]).reshape(np.shape(y))
        return x, y


@dataclass(frozen=True, eq=False)
class BirkhoffForm:
    """
    ``Z[s]`` is the normalized piece of degree s + 2 in rho (s = 0..r),
    ``X[s - 1]`` the generating function of order s.
    """
    Z: tuple
    X: tuple
    r: int
    nu: np.ndarray
    constant: float
    remainder_norm: float
    report: tuple
    growth_from: int = None

    @property
    def policy(self):
        return self.Z[0].policy

    @cached_property
    def normal_form(self):
        return series_sum(list(self.Z), self.policy)

    @cached_property
    def gradient(self):
        return tuple(action_derivative(self.normal_form, j) for j in (1, 2))

    @cached_property
    def maps(self):
        cap = tunable('LIE_ORDER_CAP')
        return tuple(BirkhoffMap(chi, self.policy, cap) for chi in self.X)

    @cached_property
    def inverse_maps(self):
        cap = tunable('LIE_ORDER_CAP')
        return tuple(
            BirkhoffMap(PoissonSeries(chi.exps, chi.parity, -chi.coef, chi.policy), self.policy, cap)
            for chi in self.X
        )

    def to_normalized(self, x, y):
        """Original diagonal Cartesian variables to normalized ones."""
        for inverse in self.inverse_maps:
            x, y = inverse(x, y)
        return x, y

    def from_normalized(self, x, y):
        for forward in reversed(self.maps):
            x, y = forward(x, y)
        return x, y

    def energy(self, I):
        rho = np.sqrt(2.0 * np.asarray(I, dtype=float))
        return self.constant + evaluate_action_angle(self.normal_form, rho, np.zeros_like(rho))


def birkhoff_normalize(H, nu, r=None, rho=(1.0, 1.0)):
    """
    Normalize an action-angle series whose degree-2 part is nu . I. ``rho``
    sets the radii of the per-order norms.
    """
    r = tunable('BIRKHOFF_ORDER') if r is None else int(r)
    if r < 0:
        raise ValueError('Birkhoff order must be non-negative')
    nu = np.asarray(nu, dtype=float)
    policy = action_policy(r + 2)
    floor = tunable('DIVISOR_FLOOR')
    tol = tunable('BIRKHOFF_CLEANUP_TOL')
    cap = tunable('LIE_ORDER_CAP')

    H = PoissonSeries(H.exps, H.parity, H.coef, policy)
    constant = H.coefficient()
    Z = [angle_average(by_degree(H, 2))]
    X, report, norms = [], [], []
    for s in range(1, r + 1):
        f = by_degree(H, s + 2)
        z = angle_average(f)
        rest = series_sub(f, z)
        chi = PoissonSeries.zero(policy)
        if not rest.is_zero():
            chi = solve_angle_homological(rest, nu, floor)
            H = _cleanup_by_degree(action_lie_exp(chi, H, cap, policy), tol)
        Z.append(z)
        X.append(chi)
        remainder = H.select(H.exps[:, 0] + H.exps[:, 1] > s + 2) if len(H) else H
        entry = OrderReport(
            order=s, generator_norm=action_norm(chi, rho), normal_norm=action_norm(z, rho),
            remainder_norm=action_norm(remainder, rho),
        )
        report.append(entry)
        if not chi.is_zero():
            norms.append((s, entry.remainder_norm))
        logger.debug(
            'Birkhoff order %d: |X|=%.3e |Z|=%.3e remainder=%.3e',
            s, entry.generator_norm, entry.normal_norm, entry.remainder_norm,
        )

    growth = _growth_start(norms)
    if growth is not None:
        logger.warning('Birkhoff remainder grows from order %d on; the normal form may diverge', growth)
    return BirkhoffForm(
        Z=tuple(Z), X=tuple(X), r=r, nu=nu, constant=constant,
        remainder_norm=report[-1].remainder_norm if report else action_norm(H, rho),
        report=tuple(report), growth_from=growth,
    )


def secular_frequencies(B, I0):
    """phi_dot = dZ/dI at the actions I0."""
    I0 = np.asarray(I0, dtype=float)
    if np.any(I0 < 0):
        raise ValueError('actions must be non-negative')
    rho = np.sqrt(2.0 * I0)
    phi = np.zeros_like(rho)
    phi_dot = np.array([float(evaluate_action_angle(g, rho, phi)) if len(g) else 0.0 for g in B.gradient])
    rate = phi_dot[0] - phi_dot[1]
    period = 2 * np.pi / abs(rate) if rate else float('inf')
    return SecularFrequencies(phi_dot=phi_dot, dpomega_rate=rate, period=period)


def harmonics_on_difference(B, rtol=DIFFERENCE_RTOL):
    """
    True when every generating function depends on phi1 - phi2 only, up to
    terms below ``rtol`` times its largest coefficient.
    """
    for chi in B.X:
        if not len(chi):
            continue
        off = chi.select(chi.exps[:, 6] + chi.exps[:, 7] != 0)
        if off.max_abs() > rtol * chi.max_abs():
            return False
    return True


def normalize_secular(h_sec, r=None, rho=None):
    """
    Diagonalize, move to action-angle form and normalize a SecularHamiltonian.
    ``rho`` (radii in the diagonal variables) defaults to ones.
    """
    D = diagonalize_quadratic(h_sec)
    diagonal = D.transform(h_sec.series)
    r = tunable('BIRKHOFF_ORDER') if r is None else int(r)
    H = to_action_angle(diagonal, action_policy(max(r + 2, 2)))
    H = _cleanup_by_degree(H, tunable('BIRKHOFF_CLEANUP_TOL'))
    B = birkhoff_normalize(H, D.nu, r, rho if rho is not None else (1.0, 1.0))
    if not harmonics_on_difference(B):
        logger.warning('Birkhoff generating functions depend on more than phi1 - phi2')
    return D, B


def action_angle_state(x, y):
    rho, phi = polar(x, y)
    return rho ** 2 / 2.0, phi


def cartesian_state(I, phi):
    return cartesian(np.sqrt(2.0 * np.asarray(I, dtype=float)), phi)
