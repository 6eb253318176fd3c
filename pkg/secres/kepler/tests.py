from unittest import skipUnless

import numpy as np
from django.conf import settings
from django.test import SimpleTestCase

from nbody.cartesian import orbit_position_velocity
from series.core import PoissonSeries, TruncationPolicy, check_dalembert, evaluate
from series.exceptions import CatalogError, DomainError, ExpansionError

from . import sampled
from .catalog import apply_overrides, load_catalog, parse_catalog
from .elements import (
    G, MJUP, PlanetElements, PoincareState, SystemEntry, a_from_lambda, elements_to_poincare,
    gm, lambda_from_a, mean_motion, poincare_to_elements, reduced_mass,
)
from .hamiltonian import exact_hamiltonian, expand_hamiltonian, perturbation, random_states
from .laplace import laplace_coefficient, laplace_lagrange_matrix
from .orbit import complex_orbit, kepler_orbit_series

SMALL = TruncationPolicy(max_L_degree=2, max_sec_degree=6, max_trig_degree=16)
ORBIT = TruncationPolicy(max_L_degree=1, max_sec_degree=12, max_trig_degree=14)


def make_entry(m1=1e-3, m2=1e-3, a1=1.0, a2=5.0, e1=0.02, e2=0.03, M=(0.3, 1.2), omega=(0.5, 2.0), m0=1.0):
    return SystemEntry(
        name='test',
        m0=m0,
        planets=(
            PlanetElements(m=m1, a=a1, e=e1, M=M[0], omega=omega[0]),
            PlanetElements(m=m2, a=a2, e=e2, M=M[1], omega=omega[1]),
        ),
    )


def swap_planets(series):
    """The same series with every planet index exchanged."""
    perm = [1, 0, 3, 2, 5, 4, 7, 6]
    return PoissonSeries(series.exps[:, perm], series.parity, series.coef, series.policy)


def secular_pair(Lambda, e, varpi):
    rho = np.sqrt(2.0 * Lambda * (1.0 - np.sqrt(1.0 - e ** 2)))
    return rho * np.cos(varpi), rho * np.sin(varpi)


class PoincareVariablesTests(SimpleTestCase):
    def test_circular_orbit_has_zero_secular_pair(self):
        state = elements_to_poincare(make_entry(e1=0.0, e2=0.0))
        np.testing.assert_array_equal(state.xi, [0.0, 0.0])
        np.testing.assert_array_equal(state.eta, [0.0, 0.0])

    def test_zero_perihelion_gives_positive_xi(self):
        state = elements_to_poincare(make_entry(omega=(0.0, 0.0)))
        np.testing.assert_array_equal(state.eta, [0.0, 0.0])
        self.assertTrue(np.all(state.xi > 0))

    def test_light_planet_action_limit(self):
        m1 = 1e-12
        Lambda = lambda_from_a(1.0, m1, 1.0)
        self.assertAlmostEqual(Lambda / (m1 * 2.0 * np.pi), 1.0, places=11)

    def test_semi_major_axis_roundtrip(self):
        for a in (0.05, 1.0, 9.5549):
            Lambda = lambda_from_a(1.0, 1e-3, a)
            self.assertAlmostEqual(a_from_lambda(1.0, 1e-3, Lambda) / a, 1.0, places=14)

    def test_elements_roundtrip(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            entry = make_entry(
                e1=rng.uniform(0.001, 0.9), e2=rng.uniform(0.001, 0.9),
                M=tuple(rng.uniform(0, 2 * np.pi, 2)), omega=tuple(rng.uniform(0, 2 * np.pi, 2)),
            )
            back = poincare_to_elements(elements_to_poincare(entry), entry.masses)
            for index, planet in enumerate(entry.planets):
                self.assertAlmostEqual(back.a[index], planet.a, delta=1e-12 * planet.a)
                self.assertAlmostEqual(back.e[index], planet.e, delta=1e-12)
                self.assertAlmostEqual(np.cos(back.omega[index] - planet.omega), 1.0, delta=1e-12)
                self.assertAlmostEqual(np.cos(back.M[index] - planet.M), 1.0, delta=1e-12)

    def test_circular_state_reports_zero_perihelion(self):
        state = PoincareState(
            Lambda=np.array([0.006, 0.01]), lam=np.array([1.0, 2.0]),
            xi=np.zeros(2), eta=np.zeros(2),
        )
        back = poincare_to_elements(state, (1.0, 1e-3, 1e-3))
        np.testing.assert_array_equal(back.e, [0.0, 0.0])
        np.testing.assert_array_equal(back.omega, [0.0, 0.0])

    def test_unbound_secular_pair_rejected(self):
        state = PoincareState(
            Lambda=np.array([0.006, 0.01]), lam=np.zeros(2),
            xi=np.array([0.2, 0.0]), eta=np.zeros(2),
        )
        with self.assertRaises(DomainError):
            poincare_to_elements(state, (1.0, 1e-3, 1e-3))

    def test_eccentricity_one_rejected(self):
        with self.assertRaises(DomainError):
            elements_to_poincare(make_entry(e1=1.0))


class KeplerOrbitSeriesTests(SimpleTestCase):
    m0, m, a = 1.0, 1e-3, 1.3

    def setUp(self):
        self.Lambda = float(lambda_from_a(self.m0, self.m, self.a))
        self.orbit = kepler_orbit_series(1, ORBIT, self.m0, self.m, self.Lambda)

    def at(self, series, lam, xi=0.0, eta=0.0):
        return evaluate(series, lam=(lam, 0.0), xi=(xi, 0.0), eta=(eta, 0.0))

    def test_circular_limit(self):
        for lam in (0.0, 0.4, 2.5):
            self.assertAlmostEqual(self.at(self.orbit.x, lam), self.a * np.cos(lam), delta=1e-13)
            self.assertAlmostEqual(self.at(self.orbit.y, lam), self.a * np.sin(lam), delta=1e-13)

    def test_first_order_eccentricity_terms(self):
        # x/a = cos l + e/2 (cos(2l - w) - 3 cos w), with e cos w = xi / sqrt(Lambda)
        half = self.a / (2.0 * np.sqrt(self.Lambda))
        x, y = self.orbit.x, self.orbit.y
        self.assertAlmostEqual(x.coefficient(p=(1, 0), k=(2, 0)) / half, 1.0, places=12)
        self.assertAlmostEqual(x.coefficient(q=(1, 0), k=(2, 0), parity='sin') / half, 1.0, places=12)
        self.assertAlmostEqual(x.coefficient(p=(1, 0)) / half, -3.0, places=12)
        self.assertAlmostEqual(y.coefficient(p=(1, 0), k=(2, 0), parity='sin') / half, 1.0, places=12)
        self.assertAlmostEqual(y.coefficient(q=(1, 0), k=(2, 0)) / half, -1.0, places=12)
        self.assertAlmostEqual(y.coefficient(q=(1, 0)) / half, -3.0, places=12)

    def test_matches_kepler_solver(self):
        e = 0.05
        mu = gm(self.m0, self.m)
        beta = reduced_mass(self.m0, self.m)
        n = float(mean_motion(self.m0, self.m, self.a))
        for M, varpi in ((0.0, 0.0), (1.1, 0.7), (4.0, 5.5)):
            xi, eta = secular_pair(self.Lambda, e, varpi)
            r, w = orbit_position_velocity(mu, self.a, e, M, varpi)
            lam = M + varpi
            self.assertAlmostEqual(self.at(self.orbit.x, lam, xi, eta), r[0], delta=1e-9 * self.a)
            self.assertAlmostEqual(self.at(self.orbit.y, lam, xi, eta), r[1], delta=1e-9 * self.a)
            scale = beta * self.a * n
            self.assertAlmostEqual(self.at(self.orbit.px, lam, xi, eta), beta * w[0], delta=1e-9 * scale)
            self.assertAlmostEqual(self.at(self.orbit.py, lam, xi, eta), beta * w[1], delta=1e-9 * scale)

    def test_degree_above_twelve_rejected(self):
        with self.assertRaises(ValueError):
            kepler_orbit_series(1, TruncationPolicy(1, 14, 16), self.m0, self.m, self.Lambda)

    def test_massless_planet_rejected(self):
        with self.assertRaises(DomainError):
            complex_orbit(1.0, 0.0, self.Lambda, 4)


class SampledSeriesTests(SimpleTestCase):
    degree = 6
    samples = 128

    def orbits(self, a1=1.0, a2=2.0, m=1e-3):
        space = sampled.key_space(self.degree)
        L1 = float(lambda_from_a(1.0, m, a1))
        L2 = float(lambda_from_a(1.0, m, a2))
        z1 = sampled.from_orbit(space, complex_orbit(1.0, m, L1, self.degree), 1, self.samples)
        z2 = sampled.from_orbit(space, complex_orbit(1.0, m, L2, self.degree), 2, self.samples)
        return space, z1, z2, L1

    def test_circular_separation_row(self):
        _, z1, z2, _ = self.orbits()
        cross = z1 * z2.conjugate()
        distance2 = z1 * z1.conjugate() + z2 * z2.conjugate() - cross - cross.conjugate()
        psi = sampled.psi_grid(self.samples)
        np.testing.assert_allclose(
            distance2.row((0, 0, 0, 0, 0, 0)).real, 5.0 - 4.0 * np.cos(psi), atol=1e-12,
        )

    def test_squared_radius_matches_kepler_solver(self):
        _, z1, _, L1 = self.orbits()
        policy = TruncationPolicy(1, self.degree, 16)
        r2 = sampled.to_poisson(z1 * z1.conjugate(), policy)
        mu = gm(1.0, 1e-3)
        for e, M, varpi in ((0.0, 0.3, 0.0), (0.01, 1.0, 2.0), (0.02, 4.0, 0.5)):
            xi, eta = secular_pair(L1, e, varpi)
            r, _ = orbit_position_velocity(mu, 1.0, e, M, varpi)
            value = evaluate(r2, lam=(M + varpi, 0.3), xi=(xi, 0.0), eta=(eta, 0.0))
            self.assertAlmostEqual(value, float(np.sum(r ** 2)), delta=1e-10)

    def test_charged_series_cannot_convert(self):
        _, z1, _, _ = self.orbits()
        with self.assertRaises(ValueError):
            sampled.to_poisson(z1, SMALL)

    def test_grid_grows_with_ratio(self):
        self.assertLessEqual(
            sampled.choose_samples(0.2, 6, 12), sampled.choose_samples(0.6, 6, 12),
        )


class LaplaceCoefficientTests(SimpleTestCase):
    def test_zero_ratio(self):
        self.assertAlmostEqual(laplace_coefficient(0.5, 0, 0.0), 2.0, places=13)
        self.assertAlmostEqual(laplace_coefficient(1.5, 1, 0.0), 0.0, places=13)

    def test_small_ratio_series(self):
        alpha = 0.01
        expected = 3.0 * alpha + 45.0 / 8.0 * alpha ** 3
        self.assertAlmostEqual(laplace_coefficient(1.5, 1, alpha) / expected, 1.0, places=6)

    def test_ratio_outside_range_rejected(self):
        with self.assertRaises(ValueError):
            laplace_coefficient(1.5, 1, 1.0)

    def test_secular_frequencies_are_negative(self):
        _, nu = laplace_lagrange_matrix(make_entry())
        self.assertTrue(np.all(nu < 0))


class ExpandHamiltonianTests(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.entry = make_entry()
        cls.h = expand_hamiltonian(cls.entry, SMALL)

    def test_mean_motions_at_reference(self):
        for index, planet in enumerate(self.entry.planets):
            expected = np.sqrt(G * (self.entry.m0 + planet.m) / planet.a ** 3)
            self.assertAlmostEqual(self.h.n_star[index] / expected, 1.0, places=12)

    def test_perturbation_obeys_dalembert_rule(self):
        self.assertFalse(np.any(check_dalembert(self.h.pert)))
        self.assertTrue(np.all(self.h.pert.l_degree <= 1))

    def test_matches_exact_hamiltonian(self):
        states = random_states(self.h, 200, 0.02, np.random.default_rng(11))
        expanded = self.h.evaluate(states)
        exact = exact_hamiltonian(self.entry.masses, states)
        np.testing.assert_allclose(expanded, exact, rtol=1e-9)

    def test_perturbation_is_order_mu(self):
        states = random_states(self.h, 50, 0.02, np.random.default_rng(3))
        L = states.translated(self.h.Lambda_star)
        values = evaluate(self.h.pert, L=L, lam=states.lam, xi=states.xi, eta=states.eta)
        self.assertLess(np.max(np.abs(values)), 10.0 * self.h.mu * abs(self.h.kepler_constant))

    def test_quadratic_secular_part_is_laplace_lagrange(self):
        S, _ = laplace_lagrange_matrix(self.entry, Lambda_star=self.h.Lambda_star)
        pert = self.h.pert
        self.assertAlmostEqual(pert.coefficient(p=(2, 0)) / (S[0, 0] / 2), 1.0, places=8)
        self.assertAlmostEqual(pert.coefficient(q=(0, 2)) / (S[1, 1] / 2), 1.0, places=8)
        self.assertAlmostEqual(pert.coefficient(p=(1, 1)) / S[0, 1], 1.0, places=8)
        self.assertAlmostEqual(pert.coefficient(q=(1, 1)) / S[0, 1], 1.0, places=8)
        self.assertEqual(pert.coefficient(p=(1, 0), q=(1, 0)), 0.0)

    def test_exchange_symmetry(self):
        m0, m1, m2 = self.entry.masses
        L1, L2 = self.h.Lambda_star
        forward, _ = perturbation(m0, m1, m2, (L1, L2), SMALL, samples=self.h.samples)
        backward, _ = perturbation(m0, m2, m1, (L2, L1), SMALL, samples=self.h.samples)
        diff = swap_planets(backward) - forward
        self.assertLessEqual(diff.max_abs(), 1e-10 * forward.max_abs())

    def test_massless_planet_gives_empty_perturbation(self):
        entry = make_entry(m2=0.0)
        h = expand_hamiltonian(entry, SMALL)
        self.assertTrue(h.pert.is_zero())
        expected = np.sqrt(G / entry.planets[1].a ** 3)
        self.assertAlmostEqual(h.n_star[1] / expected, 1.0, places=12)

    def test_crossing_orbits_rejected(self):
        with self.assertRaises(ExpansionError):
            expand_hamiltonian(make_entry(a1=1.0, a2=1.05), SMALL)

    def test_outer_planet_first_rejected(self):
        with self.assertRaises(DomainError):
            expand_hamiltonian(make_entry().swapped(), SMALL)

    @skipUnless(settings.SECRES['RUN_ACCEPTANCE'], 'long expansion oracle')
    def test_full_degree_oracle(self):
        policy = TruncationPolicy(2, 12, 12)
        entry = make_entry(a2=2.5)
        h = expand_hamiltonian(entry, policy)
        states = random_states(h, 200, 0.05, np.random.default_rng(5))
        np.testing.assert_allclose(h.evaluate(states), exact_hamiltonian(entry.masses, states), rtol=1e-8)

        coarse = expand_hamiltonian(entry, TruncationPolicy(2, 6, 12))
        wide = random_states(h, 200, 0.2, np.random.default_rng(6))
        exact = exact_hamiltonian(entry.masses, wide)
        fine_error = np.max(np.abs(h.evaluate(wide) / exact - 1.0))
        coarse_error = np.max(np.abs(coarse.evaluate(wide) / exact - 1.0))
        self.assertLessEqual(fine_error, 1e-5)
        self.assertLess(fine_error, coarse_error)


CATALOG = [
    '# comment line',
    '',
    'alpha 1.0 mjup 1.0 0.5 0.1 0 10   2.0 2.0 0.05 0 20   # source A',
    'beta  1.0 msun 1e-3 1.0 0.0 5 0   1e-3 3.0 0.0 0 0',
]


class CatalogTests(SimpleTestCase):
    def test_parse_records(self):
        entries = parse_catalog(CATALOG)
        self.assertEqual(list(entries), ['alpha', 'beta'])
        alpha = entries['alpha']
        self.assertAlmostEqual(alpha.planets[0].m, MJUP)
        self.assertAlmostEqual(alpha.planets[1].omega, np.radians(20.0))
        self.assertEqual(alpha.provenance, 'source A')
        self.assertEqual(entries['beta'].planets[0].m, 1e-3)

    def test_wrong_field_count_names_line(self):
        with self.assertRaises(CatalogError) as ctx:
            parse_catalog(CATALOG + ['gamma 1.0 mjup 1.0'], path='systems.txt')
        self.assertEqual(ctx.exception.line_number, 5)
        self.assertIn('systems.txt:5', str(ctx.exception))

    def test_invalid_record_names_line(self):
        with self.assertRaises(CatalogError) as ctx:
            parse_catalog(['bad 1.0 mjup 1.0 0.5 1.2 0 0 1.0 2.0 0.1 0 0'])
        self.assertEqual(ctx.exception.line_number, 1)
        self.assertIn('Eccentricity', str(ctx.exception))

    def test_outer_planet_first_rejected(self):
        with self.assertRaises(CatalogError):
            parse_catalog(['bad 1.0 mjup 1.0 3.0 0.1 0 0 1.0 2.0 0.1 0 0'])

    def test_duplicate_name_rejected(self):
        with self.assertRaises(CatalogError) as ctx:
            parse_catalog(CATALOG + [CATALOG[2]])
        self.assertEqual(ctx.exception.line_number, 5)

    def test_shipped_catalog(self):
        entries = load_catalog()
        self.assertEqual(len(entries), 15)
        for name in ('ups_And', 'HD128311', 'HD169830', 'Sun-Jup-Sat'):
            self.assertIn(name, entries)
        for entry in entries.values():
            self.assertLess(entry.alpha, 1.0)
        jupiter, saturn = entries['Sun-Jup-Sat'].planets
        self.assertAlmostEqual(np.cos(jupiter.M - np.radians(19.65)), 1.0, delta=1e-12)
        self.assertAlmostEqual(np.cos(saturn.M - np.radians(317.51)), 1.0, delta=1e-12)
        self.assertAlmostEqual(entries['ups_And'].planet(1).m, 1.92 * MJUP)
        self.assertIn('M unset', entries['ups_And'].provenance)

    def test_missing_file(self):
        with self.assertRaises(CatalogError):
            load_catalog('/nonexistent/catalog.txt')

    def test_overrides(self):
        entry = parse_catalog(CATALOG)['alpha']
        variant = apply_overrides(entry, sets=['M1=160', 'm2=3'], ratio='a1/a2=0.3')
        self.assertEqual(variant.name, 'alpha[M1=160,m2=3,a1/a2=0.3]')
        self.assertAlmostEqual(variant.planets[0].M, np.radians(160.0))
        self.assertAlmostEqual(variant.planets[1].m, 3 * MJUP)
        self.assertAlmostEqual(variant.alpha, 0.3)
        self.assertIs(apply_overrides(entry), entry)

    def test_bad_override(self):
        entry = parse_catalog(CATALOG)['alpha']
        with self.assertRaises(CatalogError):
            apply_overrides(entry, sets=['x1=3'])
        with self.assertRaises(CatalogError):
            apply_overrides(entry, ratio='a1/a2=1.5')
