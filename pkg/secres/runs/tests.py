import io
import tempfile
from pathlib import Path

import numpy as np
from django.conf import settings
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase

from analysis.birkhoff import SecularFrequencies
from propagation.chain import ANALYTIC_ORDER1, ANALYTIC_ORDER2, NUMERIC, RoundtripDefect, SecularTrajectory
from proximity.delta import IN_MMR, NEAR_MMR, SECULAR
from series.exceptions import RunConfigError

from .pipeline import Outputs, read_config_file, resolve_config, select_entries
from .presets import PERIOD_SWEEP, PRESETS
from .reports import (
    DIVISOR_FLOOR_LABEL, ProximityRow, compute_agreement, file_stem, write_agreement, write_proximity_table,
)

TOY = 'toy       1.0 msun 1e-3 1.0 0.02 17 29   1e-3 5.0 0.03 69 115   # synthetic test system\n'
MASSLESS = 'massless  1.0 msun 0    1.0 0.02 17 29   0    5.0 0.03 69 115   # no planet masses\n'
EXACT = 'exact21   1.0 msun 1e-3 1.0 0.02 17 29   1e-3 1.5874010519681994 0.03 69 115   # n1 = 2 n2\n'
CROSSING = 'crossing  1.0 msun 1e-3 1.0 0.02 17 29   1e-3 1.05 0.03 69 115\n'

# small truncations keep every command under a few seconds
FAST = {'sec_degree': 4, 'trig_degree': 8, 'birkhoff_order': 2}


class TempDirMixin:
    def setUp(self):
        super().setUp()
        tmp = tempfile.TemporaryDirectory()
        self.addCleanup(tmp.cleanup)
        self.tmp = Path(tmp.name)

    def write(self, name, text):
        path = self.tmp / name
        path.write_text(text, encoding='utf-8')
        return path


class ConfigResolutionTests(TempDirMixin, SimpleTestCase):
    def test_settings_defaults(self):
        cfg = resolve_config('propagate', {})
        self.assertEqual(cfg.samples, settings.SECRES['SAMPLES'])
        self.assertEqual(cfg.birkhoff_order, settings.SECRES['BIRKHOFF_ORDER'])
        self.assertEqual(cfg.order, 2)
        self.assertIsNone(cfg.kf)
        self.assertTrue(cfg.numeric)
        self.assertEqual(cfg.policy.max_sec_degree, 12)

    def test_flags_beat_file_beat_preset(self):
        path = self.write('run.cfg', '# low-resolution run\ntend-yr = 100\nsamples = 64\nnumeric = false\n')
        cfg = resolve_config('propagate', {'samples': 32}, preset='figure1', config_path=path)
        self.assertEqual(cfg.system, 'ups_And')
        self.assertEqual((cfg.kf, cfg.ks), (6, 4))
        self.assertEqual(cfg.tend_yr, 100.0)
        self.assertEqual(cfg.samples, 32)
        self.assertFalse(cfg.numeric)

    def test_overrides_accumulate(self):
        path = self.write('run.cfg', 'set = M1=160, a2=6\n')
        self.assertEqual(read_config_file(path)['set'], ['M1=160', 'a2=6'])
        cfg = resolve_config('propagate', {'set': ['e1=0.1']}, config_path=path)
        self.assertEqual(cfg.sets, ('M1=160', 'a2=6', 'e1=0.1'))

    def test_invalid_configurations(self):
        with self.assertRaises(RunConfigError):
            resolve_config('propagate', {}, config_path=self.write('bad.cfg', 'colour = red\n'))
        with self.assertRaises(RunConfigError):
            resolve_config('propagate', {'samples': 1})
        with self.assertRaises(RunConfigError):
            resolve_config('secular', {'ks': 6, 'sec_degree': 4})
        with self.assertRaises(RunConfigError):
            resolve_config('secular', {'sec_degree': 5})
        with self.assertRaises(RunConfigError):
            resolve_config('propagate', {}, config_path=self.tmp / 'missing.cfg')

    def test_presets(self):
        for name, preset in PRESETS.items():
            with self.subTest(preset=name):
                cfg = resolve_config(preset.command, {}, preset=name)
                self.assertEqual(cfg.variants, preset.variants)
        with self.assertRaises(RunConfigError):
            resolve_config('propagate', {}, preset='table1')
        with self.assertRaises(RunConfigError):
            resolve_config('propagate', {}, preset='figure9')

    def test_sweep(self):
        self.assertEqual(resolve_config('secular', {}, sweep=True).sweep, PERIOD_SWEEP)
        self.assertEqual(resolve_config('secular', {}, preset='period-table').sweep, PERIOD_SWEEP)
        self.assertEqual(resolve_config('secular', {}).sweep, ())

    def test_variants_of_a_preset(self):
        entries = select_entries(resolve_config('propagate', {}, preset='figure3'))
        self.assertEqual([e.name for e in entries], ['HD169830[M1=0]', 'HD169830[M1=160]'])
        self.assertAlmostEqual(entries[1].planet(1).M, np.radians(160.0))
        self.assertEqual(entries[0].planet(2), entries[1].planet(2))

    def test_whole_catalog_without_a_system(self):
        path = self.write('catalog.txt', TOY + MASSLESS)
        entries = select_entries(resolve_config('expand', {'catalog': str(path)}))
        self.assertEqual([e.name for e in entries], ['toy', 'massless'])


class OutputsTests(TempDirMixin, SimpleTestCase):
    def test_discard_keeps_older_files(self):
        old = self.write('old.txt', 'kept')
        outputs = Outputs(self.tmp)
        self.write('new.txt', 'partial')
        self.assertEqual(outputs.created(), [self.tmp / 'new.txt'])
        outputs.discard()
        self.assertTrue(old.exists())
        self.assertFalse((self.tmp / 'new.txt').exists())

    def test_discard_removes_a_directory_it_made(self):
        outputs = Outputs(self.tmp / 'run')
        (self.tmp / 'run' / 'a.csv').write_text('x')
        outputs.discard()
        self.assertFalse((self.tmp / 'run').exists())

    def test_file_stem(self):
        self.assertEqual(file_stem('ups_And[a1/a2=0.335]'), 'ups_And-a1-a2-0.335')
        self.assertEqual(file_stem('HD169830[M1=160]'), 'HD169830-M1-160')


def trajectory(source, e1, e2, period):
    times = np.linspace(0.0, 100.0, 5)
    freq = None
    if source != NUMERIC:
        freq = SecularFrequencies(phi_dot=np.array([0.0, -2 * np.pi / period]), dpomega_rate=2 * np.pi / period, period=period)
    return SecularTrajectory(
        times=times, e1=np.asarray(e1, dtype=float), e2=np.asarray(e2, dtype=float),
        dpomega=np.zeros(5), source=source, frequencies=freq,
    )


class ReportTests(SimpleTestCase):
    def test_agreement_within_limit(self):
        numeric = trajectory(NUMERIC, [0.1] * 5, [0.2] * 5, None)
        analytic = {
            ANALYTIC_ORDER1: trajectory(ANALYTIC_ORDER1, [0.13] * 5, [0.2] * 5, 50.0),
            ANALYTIC_ORDER2: trajectory(ANALYTIC_ORDER2, [0.1, 0.11, 0.1, 0.3, 0.3], [0.2] * 5, 50.0),
        }
        agreement = compute_agreement('toy', analytic, numeric, defect=RoundtripDefect(1e-12, 2e-12))
        self.assertFalse(agreement.failed)
        self.assertEqual(agreement.window, 50.0)
        # the samples after one secular period do not count
        self.assertAlmostEqual(agreement.deviations[ANALYTIC_ORDER2][0], 0.01)
        self.assertAlmostEqual(agreement.deviations[ANALYTIC_ORDER1][0], 0.03)
        self.assertTrue(np.isnan(agreement.periods[NUMERIC]))
        stream = io.StringIO()
        write_agreement(agreement, stream)
        self.assertIn('status = OK\n', stream.getvalue())
        self.assertIn('period_yr[analytic-order2] = 50\n', stream.getvalue())

    def test_agreement_failures(self):
        numeric = trajectory(NUMERIC, [0.1] * 5, [0.2] * 5, None)
        analytic = {
            ANALYTIC_ORDER1: trajectory(ANALYTIC_ORDER1, [0.1] * 5, [0.2] * 5, 500.0),
            ANALYTIC_ORDER2: trajectory(ANALYTIC_ORDER2, [0.1] * 5, [0.26] * 5, 500.0),
        }
        deviating = compute_agreement('toy', analytic, numeric)
        self.assertTrue(deviating.failed)
        self.assertEqual(deviating.window, 100.0)
        diverging = compute_agreement('toy', {ANALYTIC_ORDER1: analytic[ANALYTIC_ORDER1]}, numeric, divergence='grows')
        self.assertEqual(diverging.failure, 'grows')
        stream = io.StringIO()
        write_agreement(diverging, stream)
        self.assertIn('status = FAIL\nreason = grows\n', stream.getvalue())

    def test_proximity_table_groups(self):
        def row(system, label):
            return ProximityRow(system, 0.3, '5:1', 1e-3, 1e-2, 'cos(lambda1-5lambda2)', 2e-2, '-', 2e-2, label)

        stream = io.StringIO()
        write_proximity_table(
            [row('b', IN_MMR), row('a', SECULAR), row('c', DIVISOR_FLOOR_LABEL), row('d', NEAR_MMR)], stream,
        )
        lines = stream.getvalue().splitlines()
        self.assertEqual(lines[0], 'system,a1/a2,resonance,small_divisor,delta1,harmonic1,delta2,harmonic2,delta,class')
        self.assertEqual(
            [line.split(',')[0] for line in lines[1:]],
            ['# Secular', 'a', '# Near a mean-motion resonance', 'd', '# In a mean-motion resonance', 'b', 'c'],
        )
        self.assertTrue(lines[-1].endswith(',in-MMR (divisor floor)'))


class CommandTests(TempDirMixin, SimpleTestCase):
    def call(self, command, catalog_text, **options):
        catalog = self.write('catalog.txt', catalog_text)
        out = io.StringIO()
        options = {**FAST, **options}
        call_command(command, catalog=str(catalog), out=str(self.tmp / 'out'), stdout=out, **options)
        return out.getvalue()

    def output(self, name):
        return (self.tmp / 'out' / name).read_text(encoding='utf-8')

    def test_expand(self):
        text = self.call('expand', TOY + MASSLESS)
        self.assertIn('✓ toy:', text)
        self.assertIn('massless: 0 perturbation terms', text)
        summary = self.output('toy_expand_summary.txt')
        self.assertIn('perturbation_terms = ', summary)
        self.assertIn('terms_sec_degree_0 = ', summary)
        self.assertEqual(len(self.output('massless_perturbation.txt').splitlines()), 1)
        self.assertGreater(len(self.output('toy_perturbation.txt').splitlines()), 1)

    def test_malformed_catalog_line(self):
        with self.assertRaisesMessage(CommandError, 'catalog.txt:2:'):
            self.call('expand', TOY + 'broken 1.0 msun 1e-3\n')

    def test_failure_removes_partial_outputs(self):
        with self.assertRaises(CommandError):
            self.call('expand', TOY + CROSSING)
        self.assertFalse((self.tmp / 'out').exists())

    def test_unknown_system(self):
        with self.assertRaisesMessage(CommandError, "no system named 'nowhere'"):
            self.call('expand', TOY, system='nowhere')

    def test_worker_pool_keeps_catalog_order(self):
        text = self.call('expand', TOY + MASSLESS, jobs=2)
        self.assertLess(text.index('toy'), text.index('massless'))
        self.assertTrue((self.tmp / 'out' / 'massless_expand_summary.txt').exists())

    def test_secular_table(self):
        self.call('secular', TOY, system='toy', kf=4, ks=2)
        table = self.output('toy_secular.txt')
        rows = [line.split() for line in table.splitlines() if not line.startswith('#')]
        self.assertTrue(all(len(row) == 6 for row in rows))
        self.assertIn('# Order 2 used K_F = 4, K_S = 2.', table)

    def test_order_one_column_ignores_mean_anomalies(self):
        self.call('secular', TOY, system='toy', order=1)
        plain = self.output('toy_secular.txt')
        self.call('secular', TOY, system='toy', order=1, set=['M1=160', 'M2=3'])
        moved = self.output('toy-M1-160-M2-3_secular.txt')
        values = [line for line in plain.splitlines() if not line.startswith('#')]
        self.assertEqual(values, [line for line in moved.splitlines() if not line.startswith('#')])

    def test_outputs_are_deterministic(self):
        self.call('secular', TOY, system='toy', kf=4, ks=2)
        first = self.output('toy_secular.txt')
        self.call('secular', TOY, system='toy', kf=4, ks=2)
        self.assertEqual(first, self.output('toy_secular.txt'))

    def test_sweep_and_golden(self):
        text = self.call('secular', TOY, system='toy', sweep=True, golden=True)
        periods = self.output('toy_period_table.csv').splitlines()
        self.assertEqual(periods[0], 'K_F,K_S,period_yr')
        self.assertEqual([line.split(',')[:2] for line in periods[1:]], [['4', '2'], ['6', '4'], ['8', '6']])
        self.assertTrue(self.output('toy_golden_diff.txt').startswith('mismatches = '))
        self.assertIn('K_F=6 K_S=4: secular period', text)

    def test_propagate_analytic(self):
        text = self.call('propagate', TOY, system='toy', kf=4, ks=2, tend_yr=1000.0, samples=16, numeric=False)
        self.assertIn('✓ toy:', text)
        for source in (ANALYTIC_ORDER1, ANALYTIC_ORDER2):
            lines = self.output(f'toy_{source}.csv').splitlines()
            self.assertEqual(len(lines), 17)
            self.assertTrue(lines[1].endswith(f',{source}'))
            self.assertTrue(self.output(f'toy_{source}_birkhoff.csv').startswith('order,generator_norm'))
        summary = self.output('toy_summary.txt')
        self.assertIn('status = OK', summary)
        self.assertIn('roundtrip_secular = ', summary)
        self.assertFalse((self.tmp / 'out' / 'toy_numeric.csv').exists())

    def test_propagate_with_numeric(self):
        self.call('propagate', TOY, system='toy', kf=4, ks=2, tend_yr=20.0, samples=5)
        numeric = self.output('toy_numeric.csv').splitlines()
        self.assertEqual(len(numeric), 6)
        self.assertTrue(numeric[1].startswith('0,0.02'))
        self.assertEqual(self.output('toy_energy.csv').splitlines()[0], 't_yr,rel_energy_err')
        self.assertIn('max_abs_de1[analytic-order2] = ', self.output('toy_summary.txt'))

    def test_propagate_without_perturbation(self):
        self.call('propagate', MASSLESS, system='massless', tend_yr=10.0, samples=4, numeric=False)
        lines = self.output('massless_analytic-order2.csv').splitlines()
        self.assertEqual({line.split(',')[1] for line in lines[1:]}, {'0.02'})

    def test_propagate_at_exact_resonance_fails(self):
        with self.assertRaisesMessage(CommandError, 'divisor'):
            self.call('propagate', TOY + EXACT, tend_yr=100.0, samples=4, numeric=False)
        self.assertFalse((self.tmp / 'out').exists())

    def test_proximity(self):
        text = self.call('proximity', TOY + EXACT)
        table = self.output('proximity.csv').splitlines()
        self.assertEqual(table[0].split(',')[0], 'system')
        exact = next(line for line in table if line.startswith('exact21,'))
        self.assertTrue(exact.endswith(DIVISOR_FLOOR_LABEL))
        self.assertIn(',2:1,', exact)
        self.assertTrue(any(line.startswith('toy,') for line in table))
        self.assertIn('✓ exact21:', text)
