"""
Proximity of a system to a mean-motion resonance.

From the first generating function chi1 of the order-two normalization,

    dxi_j  = (1 / xi_j)  d(chi1)/d(eta_j)
    deta_j = (1 / eta_j) d(chi1)/d(xi_j)

measure the relative size of the change of the secular variables. Each is
split by harmonic and weighted with the polydisk norm at radii rho; the
largest harmonic gives dxi*_j, deta*_j, then

    delta_j = min(dxi*_j, deta*_j),    delta = max(delta_1, delta_2).
"""
import logging
from dataclasses import dataclass

import numpy as np

from kepler.elements import elements_to_poincare
from series.conf import tunable
from series.core import PARITY_NAMES, PoissonSeries, norm, partial_derivative
from series.exceptions import DegenerateRadiusError

logger = logging.getLogger(__name__)

SECULAR = 'secular'
NEAR_MMR = 'near-MMR'
IN_MMR = 'in-MMR'
CLASSES = (SECULAR, NEAR_MMR, IN_MMR)

FUNCTIONS = ('dxi1', 'dxi2', 'deta1', 'deta2')
TOP_HARMONICS = 3


@dataclass(frozen=True)
class DeltaFunctions:
    """The four quotients and the terms that could not be divided."""
    series: dict
    residual: dict

    def __getitem__(self, name):
        return self.series[name]


def _divide(f, variable):
    column = {'xi1': 2, 'xi2': 3, 'eta1': 4, 'eta2': 5}[variable]
    if f.is_zero():
        return f, f
    divisible = f.exps[:, column] > 0
    exps = f.exps[divisible].copy()
    exps[:, column] -= 1
    quotient = PoissonSeries(exps, f.parity[divisible], f.coef[divisible], f.policy)
    return quotient, f.select(~divisible)


def delta_functions(chi1):
    """Formal quotients of the derivatives of chi1 (a series, or anything with ``.chi1``)."""
    chi1 = getattr(chi1, 'chi1', chi1)
    series, residual = {}, {}
    for j in (1, 2):
        series[f'dxi{j}'], residual[f'dxi{j}'] = _divide(partial_derivative(chi1, f'eta{j}'), f'xi{j}')
        series[f'deta{j}'], residual[f'deta{j}'] = _divide(partial_derivative(chi1, f'xi{j}'), f'eta{j}')
    return DeltaFunctions(series=series, residual=residual)


def choose_rho(entry, scale=None, floor=0.0):
    """
    Polydisk radii sqrt(xi_j^2 + eta_j^2) of the initial state, times ``scale``.
    A circular orbit takes the radius ``floor`` (a scalar or one per planet).
    """
    scale = tunable('RHO_SCALE') if scale is None else float(scale)
    if scale <= 0:
        raise ValueError('rho scale must be positive')
    state = elements_to_poincare(entry)
    rho = np.hypot(state.xi, state.eta) * scale
    degenerate = rho <= 0
    floor = np.broadcast_to(np.asarray(floor, dtype=float), rho.shape)
    if np.any(degenerate):
        if np.any(floor[degenerate] <= 0):
            planets = ', '.join(str(i + 1) for i in np.nonzero(degenerate)[0])
            raise DegenerateRadiusError(
                f'{entry.name}: circular initial orbit for planet {planets}; '
                f'pass a positive radius floor to measure the proximity'
            )
        rho = np.where(degenerate, floor, rho)
    return tuple(float(r) for r in rho)


@dataclass(frozen=True)
class HarmonicTerm:
    k: tuple
    parity: int
    norm: float

    def label(self):
        k1, k2 = self.k
        parts = []
        for coef, name in ((k1, 'lambda1'), (k2, 'lambda2')):
            if coef == 0:
                continue
            sign = '-' if coef < 0 else ('+' if parts else '')
            size = '' if abs(coef) == 1 else str(abs(coef))
            parts.append(f'{sign}{size}{name}')
        return f'{PARITY_NAMES[self.parity]}({"".join(parts) or "0"})'


def harmonic_terms(f, rho):
    """Polydisk norm of every (harmonic, parity) pair, largest first."""
    if f.is_zero():
        return []
    weights = np.power(float(rho[0]), f.exps[:, 2] + f.exps[:, 4]) \
        * np.power(float(rho[1]), f.exps[:, 3] + f.exps[:, 5])
    keys = np.column_stack([f.exps[:, 6:], f.parity])
    unique, inverse = np.unique(keys, axis=0, return_inverse=True)
    sums = np.bincount(inverse.reshape(-1), weights=np.abs(f.coef) * weights, minlength=len(unique))
    terms = [
        HarmonicTerm(k=(int(u[0]), int(u[1])), parity=int(u[2]), norm=float(s))
        for u, s in zip(unique, sums)
    ]
    # both parities of a harmonic count towards its norm
    totals = {}
    for t in terms:
        totals[t.k] = totals.get(t.k, 0.0) + t.norm
    dominant = {}
    for t in terms:
        if t.k not in dominant or t.norm > dominant[t.k].norm:
            dominant[t.k] = t
    ranked = [HarmonicTerm(k=k, parity=dominant[k].parity, norm=v) for k, v in totals.items()]
    ranked.sort(key=lambda t: (-t.norm, sum(abs(v) for v in t.k), t.k))
    return ranked


def classify(delta):
    """Thresholds are inclusive on the less resonant side."""
    if delta <= tunable('SECULAR_THRESHOLD'):
        return SECULAR
    if delta <= tunable('NEAR_MMR_THRESHOLD'):
        return NEAR_MMR
    return IN_MMR


@dataclass(frozen=True)
class ProximityReport:
    rho: tuple
    top: dict
    residual_norms: dict
    delta1: float
    delta2: float
    delta: float
    label: str
    k_star: tuple = None
    small_divisor: float = None

    def star(self, name):
        """Largest harmonic norm of one delta function (0 if it is empty)."""
        terms = self.top[name]
        return terms[0].norm if terms else 0.0

    def dominant(self, planet):
        """Term realizing delta_j for planet 1 or 2."""
        xi, eta = self.top[f'dxi{planet}'], self.top[f'deta{planet}']
        if not xi or not eta:
            return None
        return xi[0] if xi[0].norm <= eta[0].norm else eta[0]


def _stars(functions, rho):
    top = {name: harmonic_terms(functions[name], rho) for name in FUNCTIONS}
    star = {name: (terms[0].norm if terms else 0.0) for name, terms in top.items()}
    delta1 = min(star['dxi1'], star['deta1'])
    delta2 = min(star['dxi2'], star['deta2'])
    return top, delta1, delta2


def delta_parameter(chi1, rho):
    """delta = max_j min(dxi*_j, deta*_j) of a generating function."""
    _, delta1, delta2 = _stars(delta_functions(chi1), rho)
    return max(delta1, delta2)


def proximity_report(gen, rho):
    functions = delta_functions(gen)
    top, delta1, delta2 = _stars(functions, rho)
    delta = max(delta1, delta2)
    residual_norms = {name: norm(functions.residual[name], rho) for name in FUNCTIONS}
    if any(v > 0 for v in residual_norms.values()):
        logger.debug('Undivided residual norms: %s', residual_norms)
    resonance = getattr(gen, 'resonance', None)
    report = ProximityReport(
        rho=tuple(float(r) for r in rho),
        top={name: terms[:TOP_HARMONICS] for name, terms in top.items()},
        residual_norms=residual_norms,
        delta1=delta1,
        delta2=delta2,
        delta=delta,
        label=classify(delta),
        k_star=resonance.k_star if resonance else None,
        small_divisor=resonance.small_divisor if resonance else None,
    )
    logger.info('delta1=%.3e delta2=%.3e -> %s', delta1, delta2, report.label)
    return report


def divisor_floor_report(resonance, rho):
    """Report for a system whose homological equation hit the divisor floor."""
    return ProximityReport(
        rho=tuple(float(r) for r in rho),
        top={name: [] for name in FUNCTIONS},
        residual_norms={name: 0.0 for name in FUNCTIONS},
        delta1=float('inf'),
        delta2=float('inf'),
        delta=float('inf'),
        label=IN_MMR,
        k_star=resonance.k_star if resonance else None,
        small_divisor=resonance.small_divisor if resonance else None,
    )

