"""
Semi-analytic propagation of the secular motion.

The initial osculating elements are carried to the Birkhoff action-angle
variables through

    elements -> Poincare -> (T_O2)^-1 -> D^-1 -> Birkhoff^-1 -> (I, phi)

where the actions stay constant and the angles turn at the frequencies of
the normal form. Every sample is then mapped back along the same chain.
The order-two transformation also depends on the fast variables; the way
back uses its average over the fast angles at L = 0, so the trajectory
carries no short-period terms.
"""
import csv
import logging
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from analysis.birkhoff import (
    SecularFrequencies, action_angle_state, cartesian_state, normalize_secular, secular_frequencies,
)
from kepler.elements import (
    PoincareState, eccentricity_from_secular, elements_to_poincare, poincare_to_elements,
)
from kepler.hamiltonian import expand_hamiltonian
from normalform.kolmogorov import (
    apply_T_O2, average_order1, average_order2, averaged_policy, kolmogorov_order2, norm_radii,
    transform_series,
)
from normalform.resonance import select_resonance
from series.conf import tunable
from series.core import PoissonSeries, angle_average, evaluate, restrict_L
from series.exceptions import DomainError

logger = logging.getLogger(__name__)

ANALYTIC_ORDER1 = 'analytic-order1'
ANALYTIC_ORDER2 = 'analytic-order2'
NUMERIC = 'numeric'
SOURCES = (ANALYTIC_ORDER1, ANALYTIC_ORDER2, NUMERIC)

CSV_HEADER = ('t_yr', 'e1', 'e2', 'dpomega_rad', 'source')
SECULAR_NAMES = ('xi1', 'xi2', 'eta1', 'eta2')
GRID_RTOL = 1e-9


@dataclass(frozen=True, eq=False)
class TransformChain:
    """
    The canonical changes between osculating elements and the Birkhoff
    variables of one system. ``diagonal`` and ``birkhoff`` are None for a
    system without perturbation (the trivial chain).
    """
    entry: object
    order: int
    hamiltonian: object
    secular: object
    generators: object = None
    diagonal: object = None
    birkhoff: object = None
    transform_initial: bool = False

    @property
    def Lambda_star(self):
        return self.hamiltonian.Lambda_star

    @property
    def is_trivial(self):
        return self.diagonal is None

    @property
    def source(self):
        return ANALYTIC_ORDER2 if self.order == 2 else ANALYTIC_ORDER1

    @property
    def uses_T_O2(self):
        gen = self.generators
        if gen is None or gen.is_identity:
            return False
        return self.order == 2 or self.transform_initial

    @cached_property
    def back_map(self):
        """Original (xi, eta) as averaged series of the normalized ones."""
        policy = self.generators.policy
        return {
            name: angle_average(restrict_L(transform_series(self.generators, PoissonSeries.variable(name, policy)), 0))
            for name in SECULAR_NAMES
        }


@dataclass(frozen=True, eq=False)
class SecularTrajectory:
    """
    Secular evolution on a uniform time grid. ``xi``/``eta`` are the
    (2, n) secular variables behind e1, e2 and dpomega when known.
    """
    times: np.ndarray
    e1: np.ndarray
    e2: np.ndarray
    dpomega: np.ndarray
    source: str
    xi: np.ndarray = None
    eta: np.ndarray = None
    frequencies: SecularFrequencies = None

    def __post_init__(self):
        if self.source not in SOURCES:
            raise ValueError(f'unknown trajectory source {self.source!r}')
        n = len(self.times)
        for name in ('e1', 'e2', 'dpomega'):
            if len(getattr(self, name)) != n:
                raise ValueError(f'{name} has {len(getattr(self, name))} samples, expected {n}')
        for name in ('e1', 'e2'):
            e = getattr(self, name)
            if np.any(e < 0) or np.any(e >= 1):
                raise DomainError(f'{name} leaves [0, 1) along the {self.source} trajectory')

    def __len__(self):
        return len(self.times)

    @property
    def eccentricities(self):
        return np.stack([self.e1, self.e2])

    def rows(self):
        for t, e1, e2, dp in zip(self.times, self.e1, self.e2, self.dpomega):
            yield float(t), float(e1), float(e2), float(dp), self.source


@dataclass(frozen=True)
class RoundtripDefect:
    """Largest change of (xi, eta) and of e after the inverse and forward chain."""
    secular: float
    eccentricity: float


def build_chain(entry, order=2, policy=None, resonance=None, K_F=None, K_S=None,
                birkhoff_order=None, transform_initial=False, hamiltonian=None, rho_scale=None):
    """
    Expand, normalize in the masses (order 1 or 2), diagonalize and put the
    secular Hamiltonian in Birkhoff normal form. ``transform_initial`` runs
    the order-one model from the order-two normalized initial conditions.
    An already expanded ``hamiltonian`` of the entry skips the expansion.
    """
    if order not in (1, 2):
        raise ValueError(f'order must be 1 or 2, got {order!r}')
    H = hamiltonian or expand_hamiltonian(entry, policy)
    if H.entry != entry:
        raise ValueError(f'hamiltonian was expanded for {H.entry.name}, not {entry.name}')
    if H.pert.is_zero():
        logger.info('%s: no perturbation; the secular elements are constant', entry.name)
        return TransformChain(entry=entry, order=order, hamiltonian=H, secular=average_order1(H))

    generators = None
    if order == 2 or transform_initial:
        resonance = (resonance or select_resonance(H.n_star)).with_truncation(K_F, K_S)
        rho = None if rho_scale is None else norm_radii(H, rho_scale)
        H_O2, generators = kolmogorov_order2(H, resonance, rho=rho, second_policy=averaged_policy(H.policy))
        secular = average_order2(H_O2, resonance) if order == 2 else average_order1(H)
    else:
        secular = average_order1(H)
    D, B = normalize_secular(secular, r=birkhoff_order)
    logger.info(
        '%s: order-%d chain, Birkhoff order %d, nu = (%.6e, %.6e) rad/yr',
        entry.name, order, B.r, D.nu[0], D.nu[1],
    )
    return TransformChain(
        entry=entry, order=order, hamiltonian=H, secular=secular, generators=generators,
        diagonal=D, birkhoff=B, transform_initial=transform_initial,
    )


def _normalized_state(entry, chain):
    if chain.entry != entry:
        raise ValueError(f'chain was built for {chain.entry.name}, not {entry.name}')
    state = elements_to_poincare(entry)
    if chain.uses_T_O2:
        state = apply_T_O2(chain.generators, state, inverse=True)
    return state


def initial_actions(entry, chain):
    """Actions and angles (I0, phi0) of the initial condition of ``entry``."""
    state = _normalized_state(entry, chain)
    if chain.is_trivial:
        return action_angle_state(state.xi, state.eta)
    x, y = chain.diagonal.from_secular(state.xi, state.eta)
    return action_angle_state(*chain.birkhoff.to_normalized(x, y))


def forward(chain, I, phi, fast=None):
    """
    PoincareState of the actions and angles. Without ``fast`` (a
    PoincareState giving Lambda and lambda in normalized variables) the
    averaged way back is used and the fast variables are Lambda* and 0.
    """
    x, y = cartesian_state(I, phi)
    if chain.is_trivial:
        xi, eta = x, y
    else:
        xi, eta = chain.diagonal.to_secular(*chain.birkhoff.from_normalized(x, y))

    if fast is not None:
        state = PoincareState(Lambda=fast.Lambda, lam=fast.lam, xi=xi, eta=eta)
        return apply_T_O2(chain.generators, state) if chain.uses_T_O2 else state

    if chain.uses_T_O2:
        back = chain.back_map
        values = {name: evaluate(back[name], xi=xi, eta=eta) for name in SECULAR_NAMES}
        shape = np.shape(xi)
        xi = np.stack([values['xi1'], values['xi2']]).reshape(shape)
        eta = np.stack([values['eta1'], values['eta2']]).reshape(shape)
    column = chain.Lambda_star.reshape(2, *([1] * (np.ndim(xi) - 1)))
    Lambda = np.broadcast_to(column, np.shape(xi)).copy()
    return PoincareState(Lambda=Lambda, lam=np.zeros_like(Lambda), xi=xi, eta=eta)


def frequencies(chain, I0):
    if chain.is_trivial:
        return SecularFrequencies(phi_dot=np.zeros(2), dpomega_rate=0.0, period=float('inf'))
    return secular_frequencies(chain.birkhoff, I0)


def time_grid(t_end, samples=None):
    samples = tunable('SAMPLES') if samples is None else int(samples)
    if samples < 2:
        raise ValueError('a trajectory needs at least two samples')
    if not t_end > 0:
        raise ValueError('t_end must be positive')
    return np.linspace(0.0, float(t_end), samples)


def check_uniform(times):
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or len(times) < 2:
        raise ValueError('time grid must be a 1-D array of at least two samples')
    steps = np.diff(times)
    if steps[0] <= 0 or np.max(np.abs(steps - steps[0])) > GRID_RTOL * abs(times[-1] - times[0]):
        raise ValueError('time grid must be increasing and uniform')
    return times


def default_t_end(chain, entry=None):
    """Two periods of the apsidal difference (one unit of time when they never turn)."""
    I0, _ = initial_actions(entry or chain.entry, chain)
    period = frequencies(chain, I0).period
    return 2.0 * period if np.isfinite(period) else 1.0


def trajectory_from_states(times, Lambda, xi, eta, source, freq=None):
    """SecularTrajectory of (2, n) arrays of secular variables."""
    e = eccentricity_from_secular(np.asarray(Lambda).reshape(2, -1), xi, eta)
    varpi = np.arctan2(eta, xi)
    dpomega = np.unwrap(varpi[0] - varpi[1])
    return SecularTrajectory(
        times=np.asarray(times, dtype=float), e1=e[0], e2=e[1], dpomega=dpomega, source=source,
        xi=xi, eta=eta, frequencies=freq,
    )


def _constant_trajectory(entry, chain, times):
    # massless planets have no Poincare pair to carry their eccentricity
    n = len(times)
    state = elements_to_poincare(entry)
    e = [p.e for p in entry.planets]
    omega = [p.omega for p in entry.planets]
    return SecularTrajectory(
        times=times, e1=np.full(n, e[0]), e2=np.full(n, e[1]), dpomega=np.full(n, omega[0] - omega[1]),
        source=chain.source, xi=np.repeat(state.xi[:, None], n, axis=1),
        eta=np.repeat(state.eta[:, None], n, axis=1), frequencies=frequencies(chain, None),
    )


def propagate(entry, chain, t_grid):
    """Trajectory on the secular torus of ``entry``, mapped back at every sample."""
    times = check_uniform(t_grid)
    if chain.is_trivial:
        _normalized_state(entry, chain)
        return _constant_trajectory(entry, chain, times)
    I0, phi0 = initial_actions(entry, chain)
    freq = frequencies(chain, I0)
    I = np.repeat(I0[:, None], len(times), axis=1)
    phi = phi0[:, None] + freq.phi_dot[:, None] * times[None, :]
    state = forward(chain, I, phi)
    logger.info(
        '%s: %s trajectory of %d samples over %.6g yr, secular period %.6g yr',
        entry.name, chain.source, len(times), times[-1] - times[0], freq.period,
    )
    return trajectory_from_states(times, state.Lambda, state.xi, state.eta, chain.source, freq)


def roundtrip_defect(entry, chain):
    """Defect of forward o inverse at t = 0 through the full (non-averaged) chain."""
    if chain.is_trivial:
        _normalized_state(entry, chain)
        return RoundtripDefect(secular=0.0, eccentricity=0.0)
    start = elements_to_poincare(entry)
    normalized = _normalized_state(entry, chain)
    I0, phi0 = initial_actions(entry, chain)
    back = forward(chain, I0, phi0, fast=normalized)
    secular = max(np.max(np.abs(back.xi - start.xi)), np.max(np.abs(back.eta - start.eta)))
    masses = entry.masses
    e_start = poincare_to_elements(start, masses).e
    e_back = poincare_to_elements(back, masses).e
    defect = RoundtripDefect(secular=float(secular), eccentricity=float(np.max(np.abs(e_back - e_start))))
    logger.debug('%s: roundtrip defect %s', entry.name, defect)
    return defect


def secular_energy(chain, trajectory):
    """The secular Hamiltonian along the (xi, eta) of a trajectory."""
    if trajectory.xi is None:
        raise ValueError('trajectory does not carry its secular variables')
    return chain.secular.evaluate(trajectory.xi, trajectory.eta)


def dpomega_rate(trajectory):
    """Slope of a least-squares line through the unwrapped dpomega."""
    slope, _ = np.polyfit(trajectory.times, trajectory.dpomega, 1)
    return float(slope)


def write_trajectory(trajectory, stream):
    writer = csv.writer(stream, lineterminator='\n')
    writer.writerow(CSV_HEADER)
    for t, e1, e2, dp, source in trajectory.rows():
        writer.writerow(['%.17g' % t, '%.17g' % e1, '%.17g' % e2, '%.17g' % dp, source])


def dump_trajectory(trajectory, path):
    with open(path, 'w', encoding='utf-8', newline='') as stream:
        write_trajectory(trajectory, stream)
    return path


def read_trajectory(stream):
    """Inverse of write_trajectory; every row must carry the same source."""
    reader = csv.DictReader(stream)
    if tuple(reader.fieldnames or ()) != CSV_HEADER:
        raise ValueError(f'unexpected trajectory header {reader.fieldnames!r}')
    columns = {name: [] for name in CSV_HEADER}
    for row in reader:
        for name in CSV_HEADER:
            columns[name].append(row[name])
    sources = set(columns['source'])
    if len(sources) != 1:
        raise ValueError(f'trajectory mixes sources {sorted(sources)}')
    values = {name: np.array(columns[name], dtype=float) for name in CSV_HEADER[:-1]}
    return SecularTrajectory(
        times=values['t_yr'], e1=values['e1'], e2=values['e2'], dpomega=values['dpomega_rad'],
        source=sources.pop(),
    )
