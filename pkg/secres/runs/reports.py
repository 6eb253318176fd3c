"""
Text and CSV artifacts written by the run commands. Every number goes out
with ``%.17g`` so identical runs give byte-identical files.
"""
import csv
import logging
import re
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from nbody.integrator import oscillation_period
from propagation.chain import ANALYTIC_ORDER1, ANALYTIC_ORDER2, NUMERIC
from proximity.delta import CLASSES, IN_MMR, NEAR_MMR, SECULAR

logger = logging.getLogger(__name__)

AGREEMENT_LIMIT = 0.05
DIVISOR_FLOOR_LABEL = f'{IN_MMR} (divisor floor)'
GROUP_TITLES = {
    SECULAR: 'Secular',
    NEAR_MMR: 'Near a mean-motion resonance',
    IN_MMR: 'In a mean-motion resonance',
}


def file_stem(name):
    """File-name safe form of a system name, e.g. 'ups_And[a1/a2=0.335]' -> 'ups_And-a1-a2-0.335'."""
    return re.sub(r'[^\w.-]+', '-', name).strip('-')


def g17(value):
    return '%.17g' % value


# expansion summary

def degree_counts(series):
    """Number of terms per L degree, secular degree and harmonic order |k1| + |k2|."""
    if not len(series):
        return {'L': {}, 'sec': {}, 'trig': {}}
    return {
        'L': dict(sorted(Counter(int(v) for v in series.l_degree).items())),
        'sec': dict(sorted(Counter(int(v) for v in series.sec_degree).items())),
        'trig': dict(sorted(Counter(int(v) for v in series.trig_degree).items())),
    }


def write_expand_summary(H, stream):
    policy = H.policy
    stream.write(f'system = {H.entry.name}\n')
    stream.write(
        f'policy = max_L_degree={policy.max_L_degree} max_sec_degree={policy.max_sec_degree} '
        f'max_trig_degree={policy.max_trig_degree}\n'
    )
    stream.write(f'Lambda_star = {g17(H.Lambda_star[0])} {g17(H.Lambda_star[1])}\n')
    stream.write(f'n_star_rad_per_yr = {g17(H.n_star[0])} {g17(H.n_star[1])}\n')
    stream.write(f'kepler_constant = {g17(H.kepler_constant)}\n')
    stream.write(f'psi_samples = {H.samples}\n')
    stream.write(f'kepler_terms = {len(H.kepler)}\n')
    stream.write(f'perturbation_terms = {len(H.pert)}\n')
    for kind, counts in degree_counts(H.pert).items():
        for degree, count in counts.items():
            stream.write(f'terms_{kind}_degree_{degree} = {count}\n')


# period sweep and Birkhoff convergence

def write_period_table(rows, stream):
    writer = csv.writer(stream, lineterminator='\n')
    writer.writerow(('K_F', 'K_S', 'period_yr'))
    for K_F, K_S, period in rows:
        writer.writerow([K_F, K_S, g17(period)])


def write_birkhoff_report(B, stream):
    writer = csv.writer(stream, lineterminator='\n')
    writer.writerow(('order', 'generator_norm', 'normal_norm', 'remainder_norm'))
    for row in B.report:
        writer.writerow([row.order, g17(row.generator_norm), g17(row.normal_norm), g17(row.remainder_norm)])


# agreement between the analytic models and the direct integration

@dataclass(frozen=True)
class Agreement:
    system: str
    t_end: float
    window: float
    periods: dict
    deviations: dict = field(default_factory=dict)
    defect: object = None
    failure: str = None

    @property
    def failed(self):
        return self.failure is not None


def _max_deviation(analytic, numeric, mask):
    worst = []
    for a, n in zip(analytic.eccentricities, numeric.eccentricities):
        difference = np.abs(a[mask] - n[mask])
        worst.append(float(np.nanmax(difference)) if np.any(np.isfinite(difference)) else float('nan'))
    return tuple(worst)


def compute_agreement(name, analytic, numeric=None, defect=None, divergence=None):
    """
    ``analytic`` maps a trajectory source to its trajectory. Deviations are
    measured over one secular period of the highest analytic order (the
    whole run when it is shorter).
    """
    reference = analytic.get(ANALYTIC_ORDER2) or analytic[ANALYTIC_ORDER1]
    times = reference.times
    t_end = float(times[-1])
    periods = {source: trajectory.frequencies.period for source, trajectory in analytic.items()}
    period = periods.get(ANALYTIC_ORDER2, periods[ANALYTIC_ORDER1])
    window = min(period, t_end) if np.isfinite(period) else t_end

    deviations = {}
    if numeric is not None:
        periods[NUMERIC] = oscillation_period(numeric.times, numeric.e1)
        mask = times <= window * (1 + 1e-12)
        deviations = {source: _max_deviation(trajectory, numeric, mask) for source, trajectory in analytic.items()}

    failure = divergence
    if failure is None and ANALYTIC_ORDER2 in deviations:
        worst = max(deviations[ANALYTIC_ORDER2])
        if worst > AGREEMENT_LIMIT:
            failure = f'order-two eccentricity deviation {worst:.3g} exceeds {AGREEMENT_LIMIT}'
    if failure:
        logger.warning('%s: secular models fail: %s', name, failure)
    return Agreement(
        system=name, t_end=t_end, window=window, periods=periods,
        deviations=deviations, defect=defect, failure=failure,
    )


def write_agreement(agreement, stream):
    stream.write(f'system = {agreement.system}\n')
    stream.write(f't_end_yr = {g17(agreement.t_end)}\n')
    stream.write(f'window_yr = {g17(agreement.window)}\n')
    for source in (ANALYTIC_ORDER1, ANALYTIC_ORDER2, NUMERIC):
        if source in agreement.periods:
            stream.write(f'period_yr[{source}] = {g17(agreement.periods[source])}\n')
    for source, (de1, de2) in agreement.deviations.items():
        stream.write(f'max_abs_de1[{source}] = {g17(de1)}\n')
        stream.write(f'max_abs_de2[{source}] = {g17(de2)}\n')
    if agreement.defect is not None:
        stream.write(f'roundtrip_secular = {g17(agreement.defect.secular)}\n')
        stream.write(f'roundtrip_eccentricity = {g17(agreement.defect.eccentricity)}\n')
    stream.write(f'status = {"FAIL" if agreement.failed else "OK"}\n')
    if agreement.failed:
        stream.write(f'reason = {agreement.failure}\n')


# proximity table

@dataclass(frozen=True)
class ProximityRow:
    system: str
    alpha: float
    resonance: str
    small_divisor: float
    delta1: float
    harmonic1: str
    delta2: float
    harmonic2: str
    delta: float
    label: str

    @property
    def group(self):
        return IN_MMR if self.label == DIVISOR_FLOOR_LABEL else self.label


def proximity_row(entry, report, resonance, divisor_floor=False):
    dominant = [report.dominant(planet) for planet in (1, 2)]
    return ProximityRow(
        system=entry.name,
        alpha=entry.alpha,
        resonance=resonance.label,
        small_divisor=resonance.small_divisor,
        delta1=report.delta1,
        harmonic1=dominant[0].label() if dominant[0] else '-',
        delta2=report.delta2,
        harmonic2=dominant[1].label() if dominant[1] else '-',
        delta=report.delta,
        label=DIVISOR_FLOOR_LABEL if divisor_floor else report.label,
    )


PROXIMITY_HEADER = (
    'system', 'a1/a2', 'resonance', 'small_divisor', 'delta1', 'harmonic1', 'delta2', 'harmonic2', 'delta', 'class',
)


def write_proximity_table(rows, stream):
    """Rows grouped secular / near a resonance / in a resonance, catalog order within a group."""
    writer = csv.writer(stream, lineterminator='\n')
    writer.writerow(PROXIMITY_HEADER)
    for group in CLASSES:
        members = [row for row in rows if row.group == group]
        if not members:
            continue
        stream.write(f'# {GROUP_TITLES[group]}\n')
        for row in members:
            writer.writerow([
                row.system, g17(row.alpha), row.resonance, g17(row.small_divisor),
                g17(row.delta1), row.harmonic1, g17(row.delta2), row.harmonic2, g17(row.delta), row.label,
            ])
