import io

import numpy as np
from django.test import SimpleTestCase

from .core import (
    COS, SIN, PoissonSeries, TruncationPolicy, angle_average, bracket_with_angle,
    check_dalembert, cleanup, evaluate, fourier_slice, harmonic_norms, lie_exp,
    partial_derivative, poisson_bracket, polydisk_norm, restrict_sec, scale,
    series_add, series_mul, series_sub, solve_angle_homological,
)
from .exceptions import NonConvergenceError, ResonantDivisorError
from .io import read_series, write_series

WIDE = TruncationPolicy(max_L_degree=8, max_sec_degree=20, max_trig_degree=20)


def term(coef, l=(0, 0), p=(0, 0), q=(0, 0), k=(0, 0), parity=COS, policy=WIDE):
    return PoissonSeries.monomial(coef, policy, l=l, p=p, q=q, k=k, parity=parity)


def random_series(rng, count, policy=WIDE, max_l=1, max_sec=2, max_k=2):
    exps = np.zeros((count, 8), dtype=np.int64)
    exps[:, 0:2] = rng.integers(0, max_l + 1, size=(count, 2))
    exps[:, 2:6] = rng.integers(0, max_sec + 1, size=(count, 4))
    exps[:, 6:8] = rng.integers(-max_k, max_k + 1, size=(count, 2))
    parity = rng.integers(0, 2, size=count)
    coef = rng.uniform(-1.0, 1.0, size=count)
    return PoissonSeries(exps, parity, coef, policy)


def assert_series_close(test, a, b, atol=1e-12):
    diff = series_sub(a, b)
    test.assertLessEqual(diff.max_abs(), atol, msg=f'series differ by {diff.max_abs():.3e}')


class TruncationPolicyTests(SimpleTestCase):
    def test_coarser_takes_smaller_bounds(self):
        a = TruncationPolicy(2, 12, 8)
        b = TruncationPolicy(1, 14, 6)
        self.assertEqual(a.coarser(b), TruncationPolicy(1, 12, 6))

    def test_negative_bound_rejected(self):
        with self.assertRaises(ValueError):
            TruncationPolicy(max_L_degree=-1)


class CanonicalFormTests(SimpleTestCase):
    def test_negative_harmonic_is_folded(self):
        s = term(2.0, k=(-1, 5), parity=SIN)
        self.assertEqual(len(s), 1)
        self.assertEqual(tuple(s.exps[0, 6:]), (1, -5))
        self.assertEqual(s.coef[0], -2.0)
        self.assertEqual(s.coefficient(k=(-1, 5), parity='sin'), 2.0)

    def test_sine_of_zero_harmonic_dropped(self):
        self.assertTrue(term(1.0, parity=SIN).is_zero())

    def test_policy_applied_on_construction(self):
        policy = TruncationPolicy(1, 2, 3)
        self.assertTrue(term(1.0, p=(3, 0), policy=policy).is_zero())
        self.assertTrue(term(1.0, k=(2, -2), policy=policy).is_zero())
        self.assertTrue(term(1.0, l=(1, 1), policy=policy).is_zero())

    def test_series_is_immutable(self):
        s = term(1.0, p=(1, 0))
        with self.assertRaises(AttributeError):
            s.coef = np.zeros(1)
        with self.assertRaises(ValueError):
            s.coef[0] = 3.0


class AdditionTests(SimpleTestCase):
    def test_zero_is_identity(self):
        a = random_series(np.random.default_rng(1), 20)
        assert_series_close(self, series_add(a, PoissonSeries.zero(WIDE)), a, atol=0.0)

    def test_inverse_gives_empty_series(self):
        a = random_series(np.random.default_rng(2), 20)
        self.assertTrue(series_add(a, -a).is_zero())

    def test_like_terms_collected(self):
        s = term(2.0, p=(1, 0)) + term(3.0, p=(1, 0))
        self.assertEqual(len(s), 1)
        self.assertEqual(s.coefficient(p=(1, 0)), 5.0)

    def test_sum_uses_tighter_policy(self):
        tight = TruncationPolicy(2, 1, 12)
        s = series_add(term(1.0, p=(2, 0)), term(1.0, p=(1, 0), policy=tight))
        self.assertEqual(s.policy.max_sec_degree, 1)
        self.assertEqual(len(s), 1)


class ProductTests(SimpleTestCase):
    def test_cos_squared(self):
        c = term(1.0, k=(1, 0))
        s = series_mul(c, c)
        self.assertEqual(len(s), 2)
        self.assertAlmostEqual(s.coefficient(), 0.5, places=15)
        self.assertAlmostEqual(s.coefficient(k=(2, 0)), 0.5, places=15)

    def test_sine_products(self):
        s1 = term(1.0, k=(1, 0), parity=SIN)
        c2 = term(1.0, k=(0, 1))
        # sin a sin a = 1/2 - 1/2 cos 2a
        ss = series_mul(s1, s1)
        self.assertAlmostEqual(ss.coefficient(), 0.5, places=15)
        self.assertAlmostEqual(ss.coefficient(k=(2, 0)), -0.5, places=15)
        # cos b sin a = 1/2 sin(a + b) + 1/2 sin(a - b)
        cs = series_mul(c2, s1)
        self.assertAlmostEqual(cs.coefficient(k=(1, 1), parity=SIN), 0.5, places=15)
        self.assertAlmostEqual(cs.coefficient(k=(1, -1), parity=SIN), 0.5, places=15)

    def test_truncation_in_secular_degree(self):
        policy = TruncationPolicy(2, 1, 12)
        s = series_mul(term(1.0, p=(1, 0), policy=policy), term(1.0, q=(1, 0), policy=policy))
        self.assertTrue(s.is_zero())

    def test_one_factor_beyond_the_bounds(self):
        policy = TruncationPolicy(1, 4, 4)
        a = term(1.0, l=(1, 0), policy=policy) + term(2.0, l=(0, 1), p=(1, 0), policy=policy)
        b = term(3.0, l=(1, 0), q=(1, 0), policy=policy)
        self.assertTrue(series_mul(a, b, policy).is_zero())
        self.assertTrue(series_mul(b, a, policy).is_zero())

    def test_binomial(self):
        s = term(1.0, p=(1, 0)) + term(1.0, q=(0, 1))
        sq = series_mul(s, s)
        self.assertEqual(len(sq), 3)
        self.assertEqual(sq.coefficient(p=(2, 0)), 1.0)
        self.assertEqual(sq.coefficient(p=(1, 0), q=(0, 1)), 2.0)
        self.assertEqual(sq.coefficient(q=(0, 2)), 1.0)

    def test_commutative_and_associative_without_truncation(self):
        rng = np.random.default_rng(3)
        a, b, c = (random_series(rng, 12) for _ in range(3))
        assert_series_close(self, series_mul(a, b), series_mul(b, a), atol=1e-14)
        left = series_mul(series_mul(a, b), c)
        right = series_mul(a, series_mul(b, c))
        assert_series_close(self, left, right, atol=1e-12)

    def test_bilinear(self):
        rng = np.random.default_rng(4)
        a, b, c = (random_series(rng, 10) for _ in range(3))
        lhs = series_mul(series_add(scale(a, 2.0), b), c)
        rhs = series_add(scale(series_mul(a, c), 2.0), series_mul(b, c))
        assert_series_close(self, lhs, rhs, atol=1e-12)

    def test_product_evaluates_to_product_of_values(self):
        rng = np.random.default_rng(5)
        a, b = random_series(rng, 15), random_series(rng, 15)
        point = dict(L=(0.3, -0.2), lam=(0.7, 2.1), xi=(0.4, -0.6), eta=(0.5, 0.1))
        self.assertAlmostEqual(
            evaluate(series_mul(a, b), **point), evaluate(a, **point) * evaluate(b, **point), places=11,
        )

    def test_batched_pairs_match_single_batch(self):
        from . import core
        rng = np.random.default_rng(6)
        a, b = random_series(rng, 40), random_series(rng, 40)
        full = series_mul(a, b)
        saved = core.PAIR_BATCH
        core.PAIR_BATCH = 7
        try:
            batched = series_mul(a, b)
        finally:
            core.PAIR_BATCH = saved
        assert_series_close(self, full, batched, atol=1e-14)


class DerivativeTests(SimpleTestCase):
    def test_polynomial_derivative(self):
        d = partial_derivative(term(1.0, p=(2, 0)), 'xi1')
        self.assertEqual(d.coefficient(p=(1, 0)), 2.0)

    def test_power_rule_in_every_polynomial_variable(self):
        f = term(0.5, l=(3, 0), p=(0, 4), q=(1, 0))
        self.assertEqual(partial_derivative(f, 'L1').coefficient(l=(2, 0), p=(0, 4), q=(1, 0)), 1.5)
        self.assertEqual(partial_derivative(f, 'xi2').coefficient(l=(3, 0), p=(0, 3), q=(1, 0)), 2.0)
        self.assertEqual(partial_derivative(f, 'eta1').coefficient(l=(3, 0), p=(0, 4)), 0.5)
        self.assertEqual(f.coefficient(l=(3, 0), p=(0, 4), q=(1, 0)), 0.5)

    def test_angle_derivative(self):
        d = partial_derivative(term(1.0, k=(1, -5)), 'lambda2')
        self.assertEqual(len(d), 1)
        self.assertEqual(d.coefficient(k=(1, -5), parity=SIN), 5.0)

    def test_mixed_partials_commute(self):
        f = random_series(np.random.default_rng(7), 25)
        one = partial_derivative(partial_derivative(f, 'xi1'), 'eta2')
        two = partial_derivative(partial_derivative(f, 'eta2'), 'xi1')
        assert_series_close(self, one, two, atol=1e-14)


class BracketTests(SimpleTestCase):
    def test_canonical_pairs(self):
        xi1 = PoissonSeries.variable('xi1', WIDE)
        eta1 = PoissonSeries.variable('eta1', WIDE)
        b = poisson_bracket(xi1, eta1)
        self.assertEqual(len(b), 1)
        self.assertEqual(b.coefficient(), 1.0)

    def test_action_angle_sign(self):
        L1 = PoissonSeries.variable('L1', WIDE)
        self.assertEqual(bracket_with_angle(L1, 1).coefficient(), -1.0)
        # {L1, cos lambda1} = -d/dlambda1 cos lambda1 = sin lambda1
        b = poisson_bracket(L1, term(1.0, k=(1, 0)))
        self.assertEqual(b.coefficient(k=(1, 0), parity=SIN), 1.0)

    def test_antisymmetry(self):
        rng = np.random.default_rng(8)
        f, g = random_series(rng, 15), random_series(rng, 15)
        self.assertLess(poisson_bracket(f, f).max_abs(), 1e-13)
        assert_series_close(self, poisson_bracket(f, g), -poisson_bracket(g, f), atol=1e-13)

    def test_jacobi_identity(self):
        rng = np.random.default_rng(9)
        f, g, h = (random_series(rng, 6) for _ in range(3))
        total = series_add(
            series_add(
                poisson_bracket(f, poisson_bracket(g, h)),
                poisson_bracket(g, poisson_bracket(h, f)),
            ),
            poisson_bracket(h, poisson_bracket(f, g)),
        )
        self.assertLess(total.max_abs(), 1e-12)

    def test_leibniz(self):
        rng = np.random.default_rng(10)
        f, g, h = (random_series(rng, 8) for _ in range(3))
        lhs = poisson_bracket(f, series_mul(g, h))
        rhs = series_add(series_mul(poisson_bracket(f, g), h), series_mul(g, poisson_bracket(f, h)))
        assert_series_close(self, lhs, rhs, atol=1e-12)


class LieSeriesTests(SimpleTestCase):
    def test_zero_generator_is_identity(self):
        f = random_series(np.random.default_rng(11), 10)
        assert_series_close(self, lie_exp(PoissonSeries.zero(WIDE), f, 5), f, atol=0.0)

    def test_constants_are_central(self):
        chi = random_series(np.random.default_rng(12), 10)
        c = PoissonSeries.constant(3.5, WIDE)
        assert_series_close(self, lie_exp(chi, c, 5), c, atol=0.0)

    def test_single_bracket(self):
        eps = 0.25
        chi = term(eps, p=(2, 0))
        result = lie_exp(chi, PoissonSeries.variable('eta1', WIDE), 2)
        self.assertEqual(len(result), 2)
        self.assertEqual(result.coefficient(q=(1, 0)), 1.0)
        self.assertEqual(result.coefficient(p=(1, 0)), 2 * eps)

    def test_preserves_canonical_bracket(self):
        policy = TruncationPolicy(0, 8, 0)
        chi = (
            term(0.1, p=(2, 0), q=(0, 1), policy=policy)
            + term(0.05, p=(0, 1), q=(1, 1), policy=policy)
            + term(-0.07, p=(1, 1), q=(1, 0), policy=policy)
        )
        xi = lie_exp(chi, PoissonSeries.variable('xi1', policy), 20)
        eta = lie_exp(chi, PoissonSeries.variable('eta1', policy), 20)
        b = restrict_sec(poisson_bracket(xi, eta), max_degree=policy.max_sec_degree - 1)
        assert_series_close(self, b, PoissonSeries.constant(1.0, policy), atol=1e-12)

    def test_growing_brackets_raise(self):
        chi = term(50.0, p=(1, 0), q=(1, 0)) + term(50.0, q=(2, 0))
        with self.assertRaises(NonConvergenceError):
            lie_exp(chi, PoissonSeries.variable('xi1', WIDE), 30)


class SliceAndAverageTests(SimpleTestCase):
    def test_average_of_pure_harmonic(self):
        self.assertTrue(angle_average(term(1.0, p=(4, 0), k=(1, -5))).is_zero())

    def test_average_keeps_constant(self):
        s = angle_average(PoissonSeries.constant(3.0, WIDE) + term(1.0, k=(1, 0)))
        self.assertEqual(len(s), 1)
        self.assertEqual(s.coefficient(), 3.0)

    def test_average_idempotent(self):
        f = random_series(np.random.default_rng(13), 30)
        assert_series_close(self, angle_average(angle_average(f)), angle_average(f), atol=0.0)

    def test_average_matches_grid_mean(self):
        f = random_series(np.random.default_rng(14), 30, max_k=2)
        grid = np.arange(8) * 2 * np.pi / 8
        lam1, lam2 = np.meshgrid(grid, grid)
        lam = np.vstack([lam1.ravel(), lam2.ravel()])
        n = lam.shape[1]
        values = evaluate(
            f, L=np.full((2, n), 0.1), lam=lam, xi=np.full((2, n), 0.2), eta=np.full((2, n), -0.3),
        )
        average = evaluate(angle_average(f), L=(0.1, 0.1), xi=(0.2, 0.2), eta=(-0.3, -0.3))
        self.assertAlmostEqual(values.mean(), average, places=10)

    def test_slice_of_secular_series_is_empty(self):
        self.assertTrue(fourier_slice(term(1.0, p=(2, 0)), 4).is_zero())

    def test_slice_bounds(self):
        self.assertTrue(fourier_slice(term(1.0, k=(3, -2)), 4).is_zero())
        s = fourier_slice(term(1.0, k=(1, -1)) + term(1.0, k=(6, 0)), 2)
        self.assertEqual(len(s), 1)
        self.assertEqual(s.coefficient(k=(1, -1)), 1.0)


class NormTests(SimpleTestCase):
    def test_empty_harmonic(self):
        self.assertEqual(polydisk_norm(term(1.0, k=(1, 0)), (2, 0), (0.1, 0.1)), 0.0)

    def test_single_term(self):
        f = term(2.0, p=(1, 0), q=(0, 1), k=(1, -5))
        self.assertAlmostEqual(polydisk_norm(f, (1, -5), (0.1, 0.2)), 0.04, places=15)
        self.assertAlmostEqual(polydisk_norm(f, (-1, 5), (0.1, 0.2)), 0.04, places=15)

    def test_homogeneity_and_both_parities(self):
        f = term(2.0, p=(1, 0), k=(1, -5)) + term(-1.0, q=(1, 0), k=(1, -5), parity=SIN)
        rho = (0.3, 0.5)
        self.assertAlmostEqual(polydisk_norm(f, (1, -5), rho), 0.9, places=15)
        self.assertAlmostEqual(polydisk_norm(scale(f, -3.0), (1, -5), rho), 2.7, places=14)
        self.assertEqual(harmonic_norms(f, rho), {(1, -5): polydisk_norm(f, (1, -5), rho)})


class EvaluateTests(SimpleTestCase):
    def test_empty(self):
        self.assertEqual(evaluate(PoissonSeries.zero(WIDE)), 0.0)

    def test_cos_squared_at_zero(self):
        s = series_mul(term(1.0, k=(1, 0)), term(1.0, k=(1, 0)))
        self.assertAlmostEqual(evaluate(s), 1.0, places=15)

    def test_batch_matches_pointwise(self):
        f = random_series(np.random.default_rng(15), 20)
        lam = np.array([[0.1, 1.3, 2.9], [0.4, -0.8, 5.0]])
        xi = np.array([[0.1, 0.2, 0.3], [0.0, -0.1, 0.2]])
        batch = evaluate(f, lam=lam, xi=xi)
        for i in range(3):
            self.assertAlmostEqual(batch[i], evaluate(f, lam=lam[:, i], xi=xi[:, i]), places=13)


class HomologicalTests(SimpleTestCase):
    def test_first_harmonic(self):
        freqs = (2.0, 1.0)
        f = term(1.0, k=(1, -1))
        chi = solve_angle_homological(f, freqs, 1e-12)
        self.assertEqual(chi.coefficient(k=(1, -1), parity=SIN), -1.0)
        residual = series_add(
            series_add(
                scale(partial_derivative(chi, 'lambda1'), freqs[0]),
                scale(partial_derivative(chi, 'lambda2'), freqs[1]),
            ),
            f,
        )
        self.assertTrue(residual.is_zero())

    def test_sine_terms(self):
        freqs = (0.3, 0.7)
        f = term(2.0, p=(1, 1), k=(2, 1), parity=SIN)
        chi = solve_angle_homological(f, freqs, 1e-12)
        self.assertAlmostEqual(chi.coefficient(p=(1, 1), k=(2, 1)), 2.0 / 1.3, places=14)

    def test_resonant_divisor(self):
        with self.assertRaises(ResonantDivisorError) as ctx:
            solve_angle_homological(term(1.0, k=(1, -2)), (2.0, 1.0), 1e-12)
        self.assertEqual(ctx.exception.k, (1, -2))

    def test_average_rejected(self):
        with self.assertRaises(ValueError):
            solve_angle_homological(PoissonSeries.constant(1.0, WIDE), (1.0, 1.0), 1e-12)


class MiscTests(SimpleTestCase):
    def test_cleanup_relative(self):
        s = term(1.0, p=(1, 0)) + term(1e-16, p=(2, 0))
        self.assertEqual(len(cleanup(s, 1e-14)), 1)
        self.assertEqual(len(cleanup(s, 0.0)), 2)

    def test_dalembert_check(self):
        good = term(1.0, p=(1, 0), k=(1, -2))
        bad = term(1.0, p=(2, 0), k=(1, -2))
        self.assertFalse(check_dalembert(good).any())
        self.assertTrue(check_dalembert(bad).all())


class SeriesTextFormatTests(SimpleTestCase):
    def test_write_then_read(self):
        f = random_series(np.random.default_rng(16), 25)
        buffer = io.StringIO()
        write_series(f, buffer)
        lines = buffer.getvalue().splitlines()
        self.assertTrue(lines[0].startswith('# policy max_L_degree=8'))
        self.assertEqual(len(lines), len(f) + 1)
        back = read_series(io.StringIO(buffer.getvalue()))
        self.assertEqual(back.policy, WIDE)
        assert_series_close(self, back, f, atol=0.0)

    def test_malformed_line(self):
        text = '# policy max_L_degree=1 max_sec_degree=2 max_trig_degree=2\n0 0 1 0 0 0 0 0 tan 1.0\n'
        with self.assertRaises(ValueError):
            read_series(io.StringIO(text))
