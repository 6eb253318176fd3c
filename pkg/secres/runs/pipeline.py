"""
Run configuration and the per-system pipelines behind the management commands.

Options resolve in four layers, later ones winning: the ``SECRES`` settings,
a preset, a flat ``key = value`` config file, the command-line flags. Each
pipeline handles one catalog entry and writes its own files, so catalog-wide
runs fan out over a process pool and gather the results in catalog order.
"""
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial
from itertools import repeat
from pathlib import Path

import django
from decouple import Csv, RepositoryEnv

from kepler.catalog import apply_overrides, get_system, load_catalog
from kepler.forms import form_errors_text
from kepler.hamiltonian import DEFAULT_POLICY, expand_hamiltonian
from nbody.integrator import config_for_grid, integrate, write_energy_log
from normalform.kolmogorov import (
    average_order1, average_order2, averaged_policy, kolmogorov_order2, norm_radii,
)
from normalform.resonance import select_resonance
from normalform.tables import diff_rows, dump_secular_table, read_golden
from propagation.chain import (
    ANALYTIC_ORDER1, ANALYTIC_ORDER2, build_chain, default_t_end, dump_trajectory, frequencies,
    initial_actions, propagate, roundtrip_defect, time_grid,
)
from proximity.delta import divisor_floor_report, proximity_report
from series.conf import tunable
from series.core import TruncationPolicy
from series.exceptions import ResonantDivisorError, RunConfigError, SecresError
from series.io import dump_series

from .forms import RunConfigForm
from .presets import PERIOD_SWEEP, Variant, get_preset
from .reports import (
    compute_agreement, file_stem, proximity_row, write_agreement, write_birkhoff_report,
    write_expand_summary, write_period_table,
)

logger = logging.getLogger(__name__)

# golden comparison tolerances of the order-one and order-two columns
GOLDEN_RTOL = (1e-5, 1e-4)


def defaults():
    return {
        'system': '',
        'catalog': '',
        'order': 2,
        'kf': None,
        'ks': None,
        'birkhoff_order': tunable('BIRKHOFF_ORDER'),
        'tend_yr': None,
        'samples': tunable('SAMPLES'),
        'rho_scale': tunable('RHO_SCALE'),
        'out': '.',
        'jobs': tunable('WORKERS'),
        'sec_degree': DEFAULT_POLICY.max_sec_degree,
        'trig_degree': DEFAULT_POLICY.max_trig_degree,
        'scheme': 'SBAB3',
        'ratio': '',
        'numeric': True,
    }


OPTION_NAMES = frozenset(defaults()) | {'set'}


@dataclass(frozen=True)
class RunConfig:
    system: str
    catalog: str
    order: int
    kf: int
    ks: int
    birkhoff_order: int
    tend_yr: float
    samples: int
    rho_scale: float
    out: Path
    jobs: int
    sec_degree: int
    trig_degree: int
    scheme: str
    ratio: str = ''
    numeric: bool = True
    sets: tuple = ()
    variants: tuple = (Variant(),)
    sweep: tuple = ()
    golden: bool = False

    @property
    def policy(self):
        return TruncationPolicy(
            max_L_degree=DEFAULT_POLICY.max_L_degree,
            max_sec_degree=self.sec_degree,
            max_trig_degree=self.trig_degree,
        )

    def path(self, name):
        return self.out / name


def read_config_file(path):
    """Options of a flat ``key = value`` file; ``set`` takes a comma-separated list."""
    try:
        repository = RepositoryEnv(str(path))
    except OSError as exc:
        raise RunConfigError(f'cannot read config file: {exc}', path=str(path)) from exc
    options = {}
    for key, value in repository.data.items():
        name = key.strip().replace('-', '_')
        if name not in OPTION_NAMES:
            raise RunConfigError(f'unknown option {key!r}', path=str(path))
        options[name] = Csv()(value) if name == 'set' else value
    return options


def resolve_config(command, cli, preset=None, config_path=None, sweep=False, golden=False):
    """RunConfig of ``command`` from the command-line values ``cli`` (None = not given)."""
    merged = defaults()
    sets = []
    variants, preset_sweep = (Variant(),), ()
    if preset:
        chosen = get_preset(preset, command)
        merged.update(chosen.options)
        variants, preset_sweep = chosen.variants, chosen.sweep
    if config_path:
        file_options = read_config_file(config_path)
        sets.extend(file_options.pop('set', []))
        merged.update(file_options)
    for key, value in cli.items():
        if key == 'set':
            sets.extend(value or [])
        elif value is not None and key in merged:
            merged[key] = value

    form = RunConfigForm(data=merged)
    if not form.is_valid():
        raise RunConfigError(form_errors_text(form))
    data = form.cleaned_data
    cfg = RunConfig(
        system=data['system'],
        catalog=data['catalog'],
        order=data['order'],
        kf=data['kf'],
        ks=data['ks'],
        birkhoff_order=data['birkhoff_order'],
        tend_yr=data['tend_yr'],
        samples=data['samples'],
        rho_scale=data['rho_scale'],
        out=Path(data['out']),
        jobs=data['jobs'],
        sec_degree=data['sec_degree'],
        trig_degree=data['trig_degree'],
        scheme=data['scheme'],
        ratio=data['ratio'] or '',
        numeric=data['numeric'],
        sets=tuple(sets),
        variants=variants,
        sweep=PERIOD_SWEEP if sweep and not preset_sweep else preset_sweep,
        golden=golden,
    )
    logger.debug('Run configuration: %s', cfg)
    return cfg


def select_entries(cfg):
    """Catalog entries of the run, one per variant; the whole catalog without a system name."""
    catalog = cfg.catalog or None
    if cfg.system:
        base = [get_system(cfg.system, catalog)]
    else:
        base = list(load_catalog(catalog).values())
    entries = []
    for entry in base:
        for variant in cfg.variants:
            sets = tuple(variant.sets) + cfg.sets
            entries.append(apply_overrides(entry, sets=sets, ratio=variant.ratio or cfg.ratio or None))
    return entries


class Outputs:
    """
    The output directory of one command. ``discard`` deletes every file that
    appeared in it since the command started (and the directory, if the
    command created it and left it empty).
    """

    def __init__(self, directory):
        self.directory = Path(directory)
        self.made_directory = not self.directory.exists()
        self.directory.mkdir(parents=True, exist_ok=True)
        self.existing = set(self.directory.iterdir())

    def created(self):
        return sorted(p for p in self.directory.iterdir() if p not in self.existing and p.is_file())

    def discard(self):
        removed = self.created()
        for path in removed:
            path.unlink()
        if self.made_directory and not any(self.directory.iterdir()):
            self.directory.rmdir()
        if removed:
            logger.info('Removed %d partial output files from %s', len(removed), self.directory)
        return removed


def _setup_worker():
    django.setup()


def _guarded(task, entry, cfg):
    try:
        return task(entry, cfg)
    except SecresError as exc:
        # subclasses with extra constructor arguments do not cross process boundaries
        raise SecresError(f'{entry.name}: {exc}') from None


def map_entries(task, entries, cfg):
    """``task(entry, cfg)`` for every entry, over ``cfg.jobs`` processes, in entry order."""
    if cfg.jobs <= 1 or len(entries) <= 1:
        return [task(entry, cfg) for entry in entries]
    workers = min(cfg.jobs, len(entries))
    logger.info('Running %d systems on %d worker processes', len(entries), workers)
    with ProcessPoolExecutor(max_workers=workers, initializer=_setup_worker) as pool:
        return list(pool.map(partial(_guarded, task), entries, repeat(cfg)))


# pipelines

@dataclass(frozen=True)
class ExpandResult:
    system: str
    files: tuple
    terms: int


def run_expand(entry, cfg):
    H = expand_hamiltonian(entry, cfg.policy)
    stem = file_stem(entry.name)
    series_path = cfg.path(f'{stem}_perturbation.txt')
    summary_path = cfg.path(f'{stem}_expand_summary.txt')
    dump_series(H.pert, series_path)
    with open(summary_path, 'w', encoding='utf-8') as handle:
        write_expand_summary(H, handle)
    return ExpandResult(system=entry.name, files=(series_path, summary_path), terms=len(H.pert))


@dataclass(frozen=True)
class SecularResult:
    system: str
    files: tuple
    rows: int
    periods: tuple = ()
    mismatches: tuple = ()


def secular_hamiltonians(H, cfg):
    """Order-one secular Hamiltonian, and the order-two one when ``cfg.order`` asks for it."""
    hamiltonians = [average_order1(H)]
    if cfg.order == 2 and not H.pert.is_zero():
        resonance = select_resonance(H.n_star).with_truncation(cfg.kf, cfg.ks)
        H_O2, _ = kolmogorov_order2(
            H, resonance, rho=norm_radii(H, cfg.rho_scale), second_policy=averaged_policy(H.policy),
        )
        hamiltonians.append(average_order2(H_O2, resonance))
    return hamiltonians


def golden_mismatches(rows):
    golden = read_golden()
    mismatches = []
    for column, rtol in enumerate(GOLDEN_RTOL):
        mismatches.extend(m for m in diff_rows(rows, golden, rtol, max_degree=6) if m.column == column)
    return tuple(mismatches)


def run_secular(entry, cfg):
    H = expand_hamiltonian(entry, cfg.policy)
    stem = file_stem(entry.name)
    files = []

    table_path = cfg.path(f'{stem}_secular.txt')
    rows = dump_secular_table(table_path, entry.name, secular_hamiltonians(H, cfg))
    files.append(table_path)

    mismatches = ()
    if cfg.golden:
        mismatches = golden_mismatches(rows)
        diff_path = cfg.path(f'{stem}_golden_diff.txt')
        with open(diff_path, 'w', encoding='utf-8') as handle:
            handle.write(f'mismatches = {len(mismatches)}\n')
            for mismatch in mismatches:
                handle.write(f'{mismatch}\n')
        files.append(diff_path)

    periods = []
    for K_F, K_S in cfg.sweep:
        chain = build_chain(
            entry, order=2, K_F=K_F, K_S=K_S, birkhoff_order=cfg.birkhoff_order,
            hamiltonian=H, rho_scale=cfg.rho_scale,
        )
        path = cfg.path(f'{stem}_secular_kf{K_F}_ks{K_S}.txt')
        dump_secular_table(path, entry.name, [chain.secular])
        files.append(path)
        I0, _ = initial_actions(entry, chain)
        periods.append((K_F, K_S, frequencies(chain, I0).period))
    if periods:
        period_path = cfg.path(f'{stem}_period_table.csv')
        with open(period_path, 'w', encoding='utf-8') as handle:
            write_period_table(periods, handle)
        files.append(period_path)

    return SecularResult(
        system=entry.name, files=tuple(files), rows=len(rows), periods=tuple(periods), mismatches=mismatches,
    )


@dataclass(frozen=True)
class PropagateResult:
    system: str
    files: tuple
    agreement: object
    max_energy_error: float = None


def _write(path, writer, payload):
    with open(path, 'w', encoding='utf-8', newline='') as handle:
        writer(payload, handle)
    return path


def run_propagate(entry, cfg):
    H = expand_hamiltonian(entry, cfg.policy)
    stem = file_stem(entry.name)
    files = []

    chain1 = build_chain(entry, order=1, birkhoff_order=cfg.birkhoff_order, hamiltonian=H)
    t_end = cfg.tend_yr or default_t_end(chain1)
    grid = time_grid(t_end, cfg.samples)
    analytic = {ANALYTIC_ORDER1: propagate(entry, chain1, grid)}
    chains = {ANALYTIC_ORDER1: chain1}

    if cfg.order == 2:
        chain2 = build_chain(
            entry, order=2, K_F=cfg.kf, K_S=cfg.ks, birkhoff_order=cfg.birkhoff_order,
            hamiltonian=H, rho_scale=cfg.rho_scale,
        )
        analytic[ANALYTIC_ORDER2] = propagate(entry, chain2, grid)
        chains[ANALYTIC_ORDER2] = chain2
        defect = roundtrip_defect(entry, chain2)
    else:
        defect = roundtrip_defect(entry, chain1)

    for source, trajectory in analytic.items():
        files.append(dump_trajectory(trajectory, cfg.path(f'{stem}_{source}.csv')))
        B = chains[source].birkhoff
        if B is not None:
            files.append(_write(cfg.path(f'{stem}_{source}_birkhoff.csv'), write_birkhoff_report, B))

    divergence = None
    top = chains.get(ANALYTIC_ORDER2, chain1).birkhoff
    if top is not None and top.growth_from is not None:
        divergence = f'Birkhoff normal form grows from order {top.growth_from}'

    numeric, max_energy_error = None, None
    if cfg.numeric:
        run = integrate(entry, config_for_grid(entry, grid, scheme=cfg.scheme))
        numeric = run.trajectory
        max_energy_error = run.max_energy_error
        files.append(dump_trajectory(numeric, cfg.path(f'{stem}_numeric.csv')))
        files.append(_write(cfg.path(f'{stem}_energy.csv'), write_energy_log, run))

    agreement = compute_agreement(
        entry.name, analytic, numeric=numeric, defect=defect, divergence=divergence,
    )
    files.append(_write(cfg.path(f'{stem}_summary.txt'), write_agreement, agreement))
    return PropagateResult(
        system=entry.name, files=tuple(files), agreement=agreement, max_energy_error=max_energy_error,
    )


def run_proximity(entry, cfg):
    """ProximityRow of one entry; a resonant divisor marks it in-MMR at the divisor floor."""
    H = expand_hamiltonian(entry, cfg.policy)
    resonance = select_resonance(H.n_star).with_truncation(cfg.kf, cfg.ks)
    rho = norm_radii(H, cfg.rho_scale)
    try:
        _, gen = kolmogorov_order2(
            H, resonance, rho=rho, second_policy=averaged_policy(H.policy), check_identity=False,
        )
    except ResonantDivisorError as exc:
        logger.warning('%s: %s', entry.name, exc)
        return proximity_row(entry, divisor_floor_report(resonance, rho), resonance, divisor_floor=True)
    return proximity_row(entry, proximity_report(gen, rho), resonance)
