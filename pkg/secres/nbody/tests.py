import io
from unittest import skipUnless

import numpy as np
from django.conf import settings
from django.test import SimpleTestCase
from scipy.optimize import brentq

from kepler.catalog import get_system
from kepler.elements import G
from kepler.tests import make_entry
from propagation.chain import NUMERIC, time_grid
from series.exceptions import CloseEncounterError, DomainError

from .cartesian import (
    angular_momentum, cartesian_to_elements, elements_to_cartesian, energy, orbit_position_velocity,
)
from .integrator import (
    IntegratorConfig, advance, config_for_grid, inner_period, integrate, kepler_drift,
    oscillation_period, write_energy_log,
)
from .kepler_solver import kepler_solve


def wrapped(x, y):
    return np.mod(np.asarray(x) - np.asarray(y) + np.pi, 2 * np.pi) - np.pi


class KeplerSolverTests(SimpleTestCase):
    def test_trivial_cases(self):
        self.assertEqual(kepler_solve(0.0, 0.3), 0.0)
        self.assertEqual(kepler_solve(1.25, 0.0), 1.25)

    def test_against_bisection(self):
        expected = brentq(lambda E: E - 0.5 * np.sin(E) - 1.0, 0.0, np.pi, xtol=1e-15)
        self.assertAlmostEqual(kepler_solve(1.0, 0.5), expected, places=14)

    def test_keeps_the_branch_of_the_mean_anomaly(self):
        E = kepler_solve(1.0 + 4 * np.pi, 0.5)
        self.assertAlmostEqual(E - 4 * np.pi, kepler_solve(1.0, 0.5), places=12)

    def test_vectorized_and_eccentric(self):
        M = np.linspace(-3.0, 3.0, 41)
        for e in (0.1, 0.9, 0.99):
            E = kepler_solve(M, e)
            self.assertEqual(E.shape, M.shape)
            np.testing.assert_allclose(E - e * np.sin(E), M, atol=1e-13)

    def test_open_orbit_rejected(self):
        with self.assertRaises(DomainError):
            kepler_solve(1.0, 1.0)


class CartesianElementsTests(SimpleTestCase):
    def test_catalog_roundtrip(self):
        for name in ('ups_And', 'HD128311', 'Sun-Jup-Sat'):
            with self.subTest(system=name):
                entry = get_system(name)
                elements, bound = cartesian_to_elements(elements_to_cartesian(entry))
                self.assertTrue(bound.all())
                np.testing.assert_allclose(elements.a, [p.a for p in entry.planets], rtol=1e-12)
                np.testing.assert_allclose(elements.e, [p.e for p in entry.planets], atol=1e-12)
                np.testing.assert_allclose(wrapped(elements.omega, [p.omega for p in entry.planets]), 0.0, atol=1e-11)
                np.testing.assert_allclose(wrapped(elements.M, [p.M for p in entry.planets]), 0.0, atol=1e-11)

    def test_circular_orbit_folds_the_perihelion_into_the_anomaly(self):
        entry = make_entry(e1=0.0, M=(0.3, 1.2), omega=(0.5, 2.0))
        elements, _ = cartesian_to_elements(elements_to_cartesian(entry))
        self.assertLess(elements.e[0], 1e-12)
        self.assertAlmostEqual(float(wrapped(elements.M[0] + elements.omega[0], 0.8)), 0.0, places=12)

    def test_integrals_of_a_massless_system_vanish(self):
        state = elements_to_cartesian(make_entry(m1=0.0, m2=0.0))
        self.assertEqual(energy(state), 0.0)
        self.assertEqual(angular_momentum(state), 0.0)


class KeplerDriftTests(SimpleTestCase):
    mu = np.array([G, G])

    def orbit(self, M=(0.2, 2.5)):
        return orbit_position_velocity(
            self.mu, np.array([1.0, 1.0]), np.array([0.1, 0.6]), np.array(M), np.array([0.3, 1.0]),
        )

    def test_full_period_returns_to_start(self):
        r, w = self.orbit()
        r1, w1 = kepler_drift(r, w, self.mu, 1.0)
        np.testing.assert_allclose(r1, r, atol=1e-12)
        np.testing.assert_allclose(w1, w, atol=1e-11)

    def test_matches_the_orbit_at_a_later_anomaly(self):
        r, w = self.orbit()
        dt = 0.137
        later = self.orbit(M=(0.2 + 2 * np.pi * dt, 2.5 + 2 * np.pi * dt))
        r1, w1 = kepler_drift(r, w, self.mu, dt)
        np.testing.assert_allclose(r1, later[0], atol=1e-12)
        np.testing.assert_allclose(w1, later[1], atol=1e-11)

    def test_unbound_orbit_rejected(self):
        r, w = self.orbit()
        with self.assertRaises(DomainError):
            kepler_drift(r, 3 * w, self.mu, 0.1)


class IntegratorConfigTests(SimpleTestCase):
    def test_invalid_values(self):
        with self.assertRaises(ValueError):
            IntegratorConfig(scheme='RK4', dt=0.01, t_end=1.0)
        with self.assertRaises(ValueError):
            IntegratorConfig(scheme='SBAB3', dt=0.0, t_end=1.0)
        with self.assertRaises(ValueError):
            IntegratorConfig(scheme='SBAB3', dt=0.01, t_end=1.0, stride=0)

    def test_step_limited_by_inner_period(self):
        entry = make_entry()
        period = inner_period(entry)
        IntegratorConfig(scheme='SBAB3', dt=period / 20, t_end=1.0).validate(entry)
        with self.assertRaises(ValueError):
            IntegratorConfig(scheme='SBAB3', dt=period / 10, t_end=1.0).validate(entry)

    def test_grid_config(self):
        entry = make_entry()
        cfg = config_for_grid(entry, time_grid(100.0, 11))
        self.assertAlmostEqual(cfg.stride * cfg.dt, 10.0, places=12)
        self.assertLessEqual(cfg.dt, inner_period(entry) / 50)
        self.assertEqual(cfg.steps, 10 * cfg.stride)
        with self.assertRaises(ValueError):
            config_for_grid(entry, np.linspace(1.0, 10.0, 5))


class MasslessPlanetsTests(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.entry = make_entry(m1=0.0, m2=0.0)
        cls.times = time_grid(100.0, 11)
        cls.numeric = integrate(cls.entry, config_for_grid(cls.entry, cls.times))

    def test_elements_stay_constant(self):
        trajectory = self.numeric.trajectory
        np.testing.assert_allclose(trajectory.e1, self.entry.planet(1).e, atol=1e-12)
        np.testing.assert_allclose(trajectory.e2, self.entry.planet(2).e, atol=1e-12)
        np.testing.assert_allclose(trajectory.dpomega, trajectory.dpomega[0], atol=1e-10)

    def test_samples_fall_on_the_grid(self):
        np.testing.assert_allclose(self.numeric.trajectory.times, self.times, rtol=1e-12)
        self.assertEqual(self.numeric.trajectory.source, NUMERIC)
        self.assertFalse(self.numeric.flagged.any())
        self.assertEqual(self.numeric.max_energy_error, 0.0)


class SplittingTests(SimpleTestCase):
    def test_energy_and_angular_momentum(self):
        entry = make_entry(m1=1e-4, m2=1e-4)
        cfg = IntegratorConfig(scheme='SBAB3', dt=inner_period(entry) / 50, t_end=50.0)
        run = integrate(entry, cfg)
        self.assertLess(run.max_energy_error, 1e-8)
        self.assertLess(run.angular_momentum_err, 1e-11)
        self.assertEqual(len(run.trajectory), cfg.steps + 1)

    def test_time_reversible(self):
        state = elements_to_cartesian(make_entry())
        forward = advance(state, 0.02, 300)
        back = advance(forward, -0.02, 300)
        np.testing.assert_allclose(back.r, state.r, atol=1e-9)
        np.testing.assert_allclose(back.w, state.w, atol=1e-9)
        self.assertAlmostEqual(back.t, 0.0, places=12)

    def test_halving_the_step_shrinks_the_energy_error(self):
        entry = make_entry()
        period = inner_period(entry)
        errors = [
            integrate(entry, IntegratorConfig(scheme='SBAB3', dt=period / steps, t_end=20.0)).max_energy_error
            for steps in (20, 40)
        ]
        self.assertGreater(errors[0] / errors[1], 3.0)

    def test_higher_order_than_leapfrog(self):
        entry = make_entry()
        dt = inner_period(entry) / 40
        leapfrog = integrate(entry, IntegratorConfig(scheme='leapfrog', dt=dt, t_end=20.0))
        sbab3 = integrate(entry, IntegratorConfig(scheme='SBAB3', dt=dt, t_end=20.0))
        self.assertLess(sbab3.max_energy_error, leapfrog.max_energy_error)

    def test_close_encounter(self):
        entry = make_entry(a2=1.0005, e1=0.0, e2=0.0, M=(0.0, 0.0), omega=(0.0, 0.0))
        with self.assertRaises(CloseEncounterError) as raised:
            integrate(entry, IntegratorConfig(scheme='leapfrog', dt=0.01, t_end=1.0))
        self.assertEqual(raised.exception.t, 0.0)
        self.assertLess(raised.exception.distance, 1e-3)


class OutputTests(SimpleTestCase):
    def test_oscillation_period(self):
        t = np.linspace(0.0, 100.0, 2001)
        self.assertAlmostEqual(oscillation_period(t, 3 + np.sin(2 * np.pi * t / 7.0)), 7.0, places=3)
        self.assertTrue(np.isnan(oscillation_period(t, np.ones_like(t))))

    def test_energy_log(self):
        entry = make_entry()
        run = integrate(entry, IntegratorConfig(scheme='SBAB3', dt=inner_period(entry) / 50, t_end=1.0))
        stream = io.StringIO()
        write_energy_log(run, stream)
        lines = stream.getvalue().splitlines()
        self.assertEqual(lines[0], 't_yr,rel_energy_err')
        self.assertEqual(len(lines), len(run.energy_times) + 1)
        self.assertEqual(lines[1], '0,0')


@skipUnless(settings.SECRES['RUN_ACCEPTANCE'], 'long direct integrations')
class LongIntegrationTests(SimpleTestCase):
    def test_jupiter_saturn_energy_drift(self):
        entry = get_system('Sun-Jup-Sat')
        cfg = IntegratorConfig(scheme='SBAB3', dt=inner_period(entry) / 50, t_end=1e5, stride=500)
        run = integrate(entry, cfg)
        self.assertLess(run.max_energy_error, 1e-9)
        self.assertLess(run.angular_momentum_err, 1e-11)

    def test_step_halving_ratio(self):
        entry = get_system('Sun-Jup-Sat')
        period = inner_period(entry)
        errors = [
            integrate(entry, IntegratorConfig(scheme='SBAB3', dt=period / steps, t_end=2000.0)).max_energy_error
            for steps in (25, 50)
        ]
        self.assertTrue(10 <= errors[0] / errors[1] <= 26, errors)

    def test_ups_andromedae_period(self):
        entry = get_system('ups_And')
        run = integrate(entry, config_for_grid(entry, time_grid(2e4, 2001), steps_per_period=30))
        period = oscillation_period(run.trajectory.times, run.trajectory.e1)
        self.assertTrue(6800 <= period <= 7200, period)
