import io
from unittest import skipUnless

import numpy as np
from django.conf import settings
from django.test import SimpleTestCase, override_settings

from kepler.catalog import get_system
from kepler.elements import G, PoincareState, elements_to_poincare
from kepler.hamiltonian import DEFAULT_POLICY, exact_hamiltonian, expand_hamiltonian
from kepler.laplace import laplace_lagrange_matrix
from kepler.tests import SMALL, make_entry
from series.core import (
    COS, SIN, PoissonSeries, TruncationPolicy, evaluate, poisson_bracket, scale, series_sum,
)
from series.exceptions import DomainError, NotNearIdentityError, ResonantDivisorError

from .graded import GradedSeries, graded_lie_exp
from .kolmogorov import (
    SecularHamiltonian, apply_T_O2, average_order1, average_order2, averaged_policy, kolmogorov_order2,
    solve_homological, transform_series,
)
from .resonance import ResonanceChoice, select_resonance
from .tables import (
    TableRow, diff_rows, read_golden, read_secular_table, secular_rows, sign_mismatches,
    write_secular_table,
)

WIDE = TruncationPolicy(max_L_degree=4, max_sec_degree=8, max_trig_degree=8)
LOW = ResonanceChoice(k_star=(1, -4), K_F=4, K_S=2, small_divisor=0.0)


def term(coef, l=(0, 0), p=(0, 0), q=(0, 0), k=(0, 0), parity=COS, policy=WIDE):
    return PoissonSeries.monomial(coef, policy, l=l, p=p, q=q, k=k, parity=parity)


def assert_series_close(test, a, b, atol):
    test.assertLessEqual((a - b).max_abs(), atol)


def secular(*terms):
    return SecularHamiltonian(series=series_sum(list(terms), WIDE), order=1)


class ResonanceTests(SimpleTestCase):
    def test_exact_resonance_is_found(self):
        choice = select_resonance((5.0, 1.0))
        self.assertEqual(choice.k_star, (1, -5))
        self.assertEqual((choice.K_F, choice.K_S), (6, 4))
        self.assertEqual(choice.small_divisor, 0.0)
        self.assertEqual(choice.label, '5:1')

    def test_jupiter_saturn_period_ratio(self):
        n = (2 * np.pi / 11.862, 2 * np.pi / 29.457)
        choice = select_resonance(n)
        self.assertEqual(choice.k_star, (2, -5))
        self.assertEqual((choice.K_F, choice.K_S), (7, 3))
        self.assertEqual(choice.label, '5:2')

    def test_tie_goes_to_lower_order(self):
        choice = select_resonance((3.0, 2.0), kmax=3)
        self.assertEqual(choice.k_star, (1, -1))
        self.assertEqual((choice.K_F, choice.K_S), (2, 0))

    def test_high_order_falls_back_to_defaults(self):
        with override_settings(SECRES={**settings.SECRES, 'KF_CAP': 4}):
            choice = select_resonance((7.0, 1.0))
        self.assertEqual(choice.k_star, (1, -7))
        self.assertEqual((choice.K_F, choice.K_S), (settings.SECRES['DEFAULT_KF'], settings.SECRES['DEFAULT_KS']))

    def test_invalid_arguments(self):
        with self.assertRaises(ValueError):
            select_resonance((2.0, 1.0), kmax=1)
        with self.assertRaises(DomainError):
            select_resonance((2.0, 0.0))

    def test_truncation_override(self):
        choice = select_resonance((5.0, 1.0)).with_truncation(K_F=8, K_S=6)
        self.assertEqual((choice.k_star, choice.K_F, choice.K_S), ((1, -5), 8, 6))
        with self.assertRaises(ValueError):
            ResonanceChoice(k_star=(1, -2), K_F=-1, K_S=0, small_divisor=0.0)


class GradedSeriesTests(SimpleTestCase):
    def test_lie_transform_by_grade(self):
        f0 = term(2.0, l=(1, 0)) + term(-0.5, l=(0, 2))
        f1 = term(0.3, p=(2, 0)) + term(0.1, p=(1, 0), q=(0, 1), k=(1, -1))
        chi = term(0.05, p=(0, 1), k=(1, -2), parity=SIN) + term(0.02, q=(1, 1))
        out = graded_lie_exp(chi, GradedSeries({0: f0, 1: f1}), {0: WIDE, 1: WIDE, 2: WIDE})

        first = poisson_bracket(chi, f0)
        expected = {
            0: f0,
            1: f1 + first,
            2: poisson_bracket(chi, f1) + scale(poisson_bracket(chi, first), 0.5),
        }
        self.assertEqual(out.grades(), [0, 1, 2])
        for grade, series in expected.items():
            assert_series_close(self, out[grade], series, 1e-14)

    def test_grades_above_maximum_are_dropped(self):
        graded = GradedSeries({0: term(1.0), 3: term(2.0)})
        self.assertEqual(graded.grades(), [0])
        self.assertIsNone(graded[3])
        self.assertTrue(graded.part(2, WIDE).is_zero())

    def test_immutable(self):
        graded = GradedSeries({0: term(1.0)})
        with self.assertRaises(AttributeError):
            graded.max_grade = 5
        with self.assertRaises(ValueError):
            GradedSeries({-1: term(1.0)})


class HomologicalEquationTests(SimpleTestCase):
    def test_single_harmonic(self):
        chi = solve_homological(term(1.0, k=(1, -1)), (2.0, 1.0), K_F=2, K_S=0)
        assert_series_close(self, chi, term(-1.0, k=(1, -1), parity=SIN), 1e-15)

    def test_slice_keeps_low_harmonics_and_degrees(self):
        f = term(1.0, k=(1, -1)) + term(1.0, p=(3, 0), k=(1, -2)) + term(1.0, k=(3, -2)) + term(4.0, p=(2, 0))
        chi = solve_homological(f, (3.0, 1.0), K_F=4, K_S=2)
        self.assertEqual(len(chi), 1)
        self.assertAlmostEqual(chi.coefficient(k=(1, -1), parity=SIN), -0.5)

    def test_secular_terms_only_give_zero(self):
        self.assertTrue(solve_homological(term(1.0, p=(2, 0)), (2.0, 1.0), 6, 4).is_zero())

    def test_resonant_harmonic_refused(self):
        with self.assertRaises(ResonantDivisorError) as caught:
            solve_homological(term(1.0, p=(1, 0), k=(1, -2)), (2.0, 1.0), 6, 4)
        self.assertEqual(tuple(caught.exception.k), (1, -2))


class OrderOneTests(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.entry = make_entry()
        cls.h = expand_hamiltonian(cls.entry, SMALL)
        cls.sec = average_order1(cls.h)

    def test_depends_on_secular_variables_only(self):
        s = self.sec.series
        self.assertFalse(np.any(s.exps[:, :2]) or np.any(s.exps[:, 6:]))
        self.assertTrue(np.all(s.sec_degree % 2 == 0))
        odd_eta = s.select((s.exps[:, 4] + s.exps[:, 5]) % 2 == 1)
        self.assertLessEqual(odd_eta.max_abs(), 1e-12 * s.max_abs())

    def test_quadratic_part_is_laplace_lagrange(self):
        S, _ = laplace_lagrange_matrix(self.entry, Lambda_star=self.h.Lambda_star)
        self.assertAlmostEqual(self.sec.coefficient(p=(2, 0)) / (S[0, 0] / 2), 1.0, places=8)
        self.assertAlmostEqual(self.sec.coefficient(q=(0, 2)) / (S[1, 1] / 2), 1.0, places=8)
        self.assertAlmostEqual(self.sec.coefficient(p=(1, 1)) / S[0, 1], 1.0, places=8)

    def test_rotation_invariance(self):
        series = self.sec.series
        largest = series.max_abs()
        for exps, _, coef in series:
            p, q = tuple(exps[2:4]), tuple(exps[4:6])
            swapped = self.sec.coefficient(p=q, q=p) * (-1) ** sum(p)
            self.assertLessEqual(abs(swapped - coef), 1e-9 * largest)

    def test_matches_numerical_average(self):
        state = elements_to_poincare(self.entry)
        grid = np.linspace(0.0, 2 * np.pi, 64, endpoint=False)
        lam1, lam2 = np.meshgrid(grid, grid, indexing='ij')
        count = lam1.size
        states = PoincareState(
            Lambda=np.repeat(self.h.Lambda_star[:, None], count, axis=1),
            lam=np.stack([lam1.ravel(), lam2.ravel()]),
            xi=np.repeat(state.xi[:, None], count, axis=1),
            eta=np.repeat(state.eta[:, None], count, axis=1),
        )
        average = np.mean(exact_hamiltonian(self.entry.masses, states)) - self.h.kepler_constant
        value = self.sec.evaluate(state.xi, state.eta)
        self.assertAlmostEqual(value / average, 1.0, places=8)

    def test_rejects_odd_or_fast_terms(self):
        with self.assertRaises(ValueError):
            secular(term(1.0, p=(1, 0)))
        with self.assertRaises(ValueError):
            secular(term(1.0, l=(1, 0)))


class OrderTwoTests(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.entry = make_entry()
        cls.h = expand_hamiltonian(cls.entry, SMALL)
        cls.h_o2, cls.gen = kolmogorov_order2(cls.h, LOW)
        cls.order1 = average_order1(cls.h)
        cls.order2 = average_order2(cls.h_o2, LOW)

    def test_generating_functions_are_small(self):
        self.assertFalse(self.gen.chi1.is_zero())
        self.assertFalse(self.gen.chi2.is_zero())
        self.assertLess(self.gen.near_identity_metric, settings.SECRES['NEAR_IDENTITY_WARN'])
        self.assertTrue(np.all(self.gen.chi1.l_degree == 0))
        self.assertTrue(np.all(self.gen.chi1.trig_degree <= LOW.K_F))
        self.assertTrue(np.all(self.gen.chi1.sec_degree <= LOW.K_S))

    def test_order_two_is_a_small_correction(self):
        self.assertTrue(np.all(self.order2.series.sec_degree % 2 == 0))
        self.assertEqual(self.order2.provenance['K_F'], LOW.K_F)
        for p in ((2, 0), (1, 1), (0, 2)):
            first = self.order1.coefficient(p=p)
            second = self.order2.coefficient(p=p)
            self.assertNotEqual(first, second)
            self.assertLess(abs(second / first - 1.0), 0.05)

    def test_energy_error_is_third_order_in_the_masses(self):
        errors = []
        for m in (1e-3, 5e-4):
            entry = make_entry(m1=m, m2=m)
            h = expand_hamiltonian(entry, SMALL)
            h_o2, gen = kolmogorov_order2(h, LOW)
            self.assertFalse(h_o2.graded[2].select(h_o2.graded[2].trig_degree > 0).is_zero())
            z = elements_to_poincare(entry)
            L = z.translated(h.Lambda_star)
            normalized = h_o2.kepler_constant + evaluate(h_o2.series, L=L, lam=z.lam, xi=z.xi, eta=z.eta)
            original = h.evaluate(apply_T_O2(gen, z))
            errors.append(float(abs(original - normalized) / abs(original)))
        self.assertAlmostEqual(errors[0] / errors[1], 8.0, delta=1.5)

    def test_averaged_policy_keeps_the_secular_average(self):
        h_o2, gen = kolmogorov_order2(self.h, LOW, second_policy=averaged_policy(SMALL))
        self.assertTrue(np.all(h_o2.graded[2].trig_degree == 0))
        assert_series_close(self, gen.chi2, self.gen.chi2, 0.0)
        average = average_order2(h_o2, LOW).series
        assert_series_close(self, average, self.order2.series, 1e-14 * self.order2.series.max_abs())

    def test_no_harmonics_reproduces_order_one(self):
        resonance = LOW.with_truncation(K_F=0, K_S=0)
        h_o2, gen = kolmogorov_order2(self.h, resonance)
        self.assertTrue(gen.is_identity)
        assert_series_close(self, average_order2(h_o2).series, self.order1.series, 0.0)

    def test_massless_planet_gives_identity(self):
        h = expand_hamiltonian(make_entry(m2=0.0), SMALL)
        h_o2, gen = kolmogorov_order2(h, LOW)
        self.assertTrue(gen.is_identity)
        self.assertTrue(average_order2(h_o2).series.is_zero())
        state = elements_to_poincare(make_entry(m2=0.0))
        self.assertIs(apply_T_O2(gen, state), state)

    def test_far_from_identity_refused(self):
        with override_settings(SECRES={**settings.SECRES, 'NEAR_IDENTITY_REFUSE': 1e-12}):
            with self.assertRaises(NotNearIdentityError):
                kolmogorov_order2(self.h, LOW)

    def test_state_roundtrip(self):
        z = elements_to_poincare(self.entry)
        x = apply_T_O2(self.gen, z)
        back = apply_T_O2(self.gen, x, inverse=True)
        self.assertGreater(np.max(np.abs(x.xi - z.xi)), 0.0)
        for name in ('lam', 'xi', 'eta'):
            np.testing.assert_allclose(getattr(back, name), getattr(z, name), rtol=0, atol=1e-10)
        np.testing.assert_allclose(back.Lambda, z.Lambda, rtol=1e-12)

    def test_series_transform_matches_state_map(self):
        z = elements_to_poincare(self.entry)
        x = apply_T_O2(self.gen, z)
        for j, name in ((0, 'xi1'), (1, 'eta2')):
            f = transform_series(self.gen, PoissonSeries.variable(name, SMALL))
            L = z.translated(self.h.Lambda_star)
            value = evaluate(f, L=L, lam=z.lam, xi=z.xi, eta=z.eta)
            expected = x.xi[0] if name == 'xi1' else x.eta[1]
            self.assertAlmostEqual(value, expected, delta=1e-11)


class SecularTableTests(SimpleTestCase):
    def test_row_order_and_union(self):
        first = secular(term(-3.0), term(-1.0, p=(0, 2)), term(-2.0, p=(2, 0)), term(0.5, p=(1, 1)))
        second = secular(term(-3.1), term(-2.1, p=(2, 0)), term(0.1, p=(2, 2)))
        rows = secular_rows([first, second])
        self.assertEqual(
            [row.exponents for row in rows],
            [(0, 0, 0, 0), (2, 0, 0, 0), (1, 1, 0, 0), (0, 2, 0, 0), (2, 2, 0, 0)],
        )
        self.assertEqual(rows[2].values, (0.5, 0.0))
        self.assertEqual(rows[4].values, (0.0, 0.1))

    def test_degree_cut(self):
        rows = secular_rows([secular(term(1.0, p=(8, 0)), term(1.0, q=(2, 0)))], max_degree=6)
        self.assertEqual([row.exponents for row in rows], [(0, 0, 2, 0)])

    def test_constant_row_adds_the_keplerian_energy(self):
        series = series_sum([term(-0.25), term(-1.0, p=(2, 0))], WIDE)
        h = SecularHamiltonian(series=series, order=1, kepler_constant=-3.5)
        rows = secular_rows([h, secular(term(-1.0, q=(2, 0)))])
        self.assertEqual(rows[0].exponents, (0, 0, 0, 0))
        self.assertEqual(rows[0].values, (-3.75, 0.0))
        self.assertEqual(rows[1].values, (-1.0, 0.0))

    def test_written_table_reads_back(self):
        rows = [TableRow((0, 0, 0, 0), (-3.8449638957147059, -3.849)), TableRow((2, 0, 0, 0), (-4.72e-4, 0.1))]
        stream = io.StringIO()
        write_secular_table(rows, stream, comments=['header'])
        self.assertTrue(stream.getvalue().startswith('# header\n'))
        stream.seek(0)
        self.assertEqual(read_secular_table(stream), rows)

    def test_malformed_row_names_line(self):
        with self.assertRaisesMessage(ValueError, 'line 2'):
            read_secular_table(io.StringIO('# c\n0 0 0 x 1.0 2.0\n'))

    def test_golden_table(self):
        golden = read_golden()
        self.assertEqual(len(golden), 70)
        self.assertEqual(golden[0].exponents, (0, 0, 0, 0))
        self.assertEqual(golden[0].values, (-3.8449638957147059 / G, -3.8490132363346130 / G))
        self.assertEqual(golden[1].values, (-4.7203675679835364e-4, -4.7442843563932181e-4))
        keys = [(row.degree, tuple(-e for e in row.exponents)) for row in golden]
        self.assertEqual(keys, sorted(keys))
        self.assertEqual(max(row.degree for row in golden), 6)

    def test_golden_table_is_rotation_invariant(self):
        golden = {row.exponents: row.values for row in read_golden()}
        for (p1, p2, q1, q2), values in golden.items():
            swapped = golden[(q1, q2, p1, p2)]
            np.testing.assert_allclose(swapped, values, rtol=1e-10)

    def test_diff_against_golden(self):
        golden = read_golden()
        self.assertEqual(diff_rows(golden, golden, rtol=1e-15), [])
        changed = [TableRow(golden[1].exponents, (golden[1].values[0] * 1.01, golden[1].values[1]))]
        mismatches = diff_rows(changed + golden[2:], golden, rtol=1e-5)
        self.assertEqual(len(mismatches), 3)
        self.assertIn((2, 0, 0, 0), [m.exponents for m in mismatches])
        self.assertEqual(sign_mismatches(golden, golden), [])


@skipUnless(settings.SECRES['RUN_ACCEPTANCE'], 'long secular-coefficient reproduction')
class UpsAndromedaeTests(SimpleTestCase):
    """
    Every coefficient of the reference table through degree 6. Expanding to
    degree 8 in (xi, eta) and harmonic 6 leaves those coefficients exact for
    K_F = 6, K_S = 4.
    """

    POLICY = TruncationPolicy(max_L_degree=2, max_sec_degree=8, max_trig_degree=6)
    RTOL = (1e-5, 1e-4)

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.h = expand_hamiltonian(get_system('ups_And'), cls.POLICY)
        cls.resonance = select_resonance(cls.h.n_star)
        h_o2, _ = kolmogorov_order2(cls.h, cls.resonance, second_policy=averaged_policy(cls.POLICY))
        order2 = average_order2(h_o2, cls.resonance)
        cls.rows = secular_rows([average_order1(cls.h), order2], max_degree=6)
        cls.golden = read_golden()

    def test_nearest_resonance(self):
        self.assertEqual(self.resonance.label, '5:1')
        self.assertEqual((self.resonance.K_F, self.resonance.K_S), (6, 4))

    def test_every_row_matches(self):
        self.assertEqual(sign_mismatches(self.rows, self.golden), [])
        for column, rtol in enumerate(self.RTOL):
            with self.subTest(column=column):
                mismatches = [m for m in diff_rows(self.rows, self.golden, rtol) if m.column == column]
                self.assertEqual(mismatches, [], '\n'.join(str(m) for m in mismatches))

    def test_constant_row_carries_the_keplerian_energy(self):
        constant = self.rows[0]
        self.assertEqual(constant.exponents, (0, 0, 0, 0))
        self.assertAlmostEqual(constant.values[0] / self.golden[0].values[0], 1.0, delta=1e-5)
        self.assertLess(abs(constant.values[0] - self.h.kepler_constant), 0.01 * abs(self.h.kepler_constant))
