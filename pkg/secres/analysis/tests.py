import numpy as np
from django.test import SimpleTestCase
from scipy import linalg

from kepler.hamiltonian import expand_hamiltonian
from kepler.laplace import laplace_lagrange_matrix
from kepler.tests import SMALL, make_entry
from normalform.kolmogorov import average_order1
from series.core import COS, PoissonSeries, TruncationPolicy, evaluate, poisson_bracket
from series.exceptions import EllipticityError, ResonantDivisorError

from .actionangle import (
    action_bracket, action_policy, cartesian, cartesian_functions, evaluate_action_angle, polar,
    to_action_angle,
)
from .birkhoff import (
    SecularFrequencies, _growth_start, birkhoff_normalize, harmonics_on_difference, normalize_secular,
    secular_frequencies,
)
from .diagonal import J, diagonalize_quadratic, quadratic_matrix

CARTESIAN = TruncationPolicy(max_L_degree=0, max_sec_degree=8, max_trig_degree=0)
NU = np.array([-1.0, -0.37])


def monomial(coef, p=(0, 0), q=(0, 0), policy=CARTESIAN):
    return PoissonSeries.monomial(coef, policy, p=p, q=q)


def quadratic_series(S, policy=CARTESIAN):
    """z^T S z / 2 with z = (xi1, xi2, eta1, eta2)."""
    terms = []
    for a in range(4):
        for b in range(a, 4):
            exps = [0, 0, 0, 0]
            exps[a] += 1
            exps[b] += 1
            coef = S[a, a] / 2 if a == b else S[a, b]
            if coef:
                terms.append(monomial(coef, p=tuple(exps[:2]), q=tuple(exps[2:])))
    return sum(terms[1:], terms[0])


def oscillators(nu=NU, policy=CARTESIAN):
    return (
        monomial(nu[0] / 2, p=(2, 0), policy=policy) + monomial(nu[0] / 2, q=(2, 0), policy=policy)
        + monomial(nu[1] / 2, p=(0, 2), policy=policy) + monomial(nu[1] / 2, q=(0, 2), policy=policy)
    )


def random_even_series(rng, degree=4, count=12):
    terms = []
    while len(terms) < count:
        exps = rng.integers(0, degree + 1, size=4)
        if exps.sum() % 2 == 0 and 0 < exps.sum() <= degree:
            terms.append(monomial(rng.uniform(-1, 1), p=tuple(exps[:2]), q=tuple(exps[2:])))
    return sum(terms[1:], terms[0])


class DiagonalizeTests(SimpleTestCase):
    def test_diagonal_input_gives_identity(self):
        D = diagonalize_quadratic(oscillators())
        np.testing.assert_allclose(D.matrix, np.eye(4), atol=1e-12)
        np.testing.assert_allclose(D.nu, NU, rtol=1e-12)

    def test_symplectic_conjugation_is_undone(self):
        rng = np.random.default_rng(17)
        A = rng.normal(scale=0.3, size=(4, 4))
        P = linalg.expm(J @ (A + A.T))
        P_inv = -J @ P.T @ J
        diagonal = np.diag([NU[0], NU[1], NU[0], NU[1]])
        S = P_inv.T @ diagonal @ P_inv
        D = diagonalize_quadratic(quadratic_series(S))

        np.testing.assert_allclose(np.sort(D.nu), np.sort(NU), rtol=1e-10)
        np.testing.assert_allclose(D.matrix.T @ J @ D.matrix, J, atol=1e-12)
        S_new = quadratic_matrix(D.transform(quadratic_series(S)))
        np.testing.assert_allclose(S_new, np.diag(np.concatenate([D.nu, D.nu])), atol=1e-12)

    def test_state_roundtrip(self):
        rng = np.random.default_rng(2)
        A = rng.normal(scale=0.3, size=(4, 4))
        S = linalg.expm(J @ (A + A.T)).T @ np.diag([-1.0, -0.3, -1.0, -0.3]) @ linalg.expm(J @ (A + A.T))
        D = diagonalize_quadratic(quadratic_series(S))
        xi, eta = rng.normal(size=(2, 5)), rng.normal(size=(2, 5))
        back = D.to_secular(*D.from_secular(xi, eta))
        np.testing.assert_allclose(back[0], xi, atol=1e-12)
        np.testing.assert_allclose(back[1], eta, atol=1e-12)

    def test_hyperbolic_origin_rejected(self):
        saddle = monomial(0.5, p=(2, 0)) + monomial(-0.5, q=(2, 0)) + monomial(0.5, p=(0, 2)) + monomial(0.5, q=(0, 2))
        with self.assertRaises(EllipticityError):
            diagonalize_quadratic(saddle)

    def test_degenerate_quadratic_part_rejected(self):
        with self.assertRaises(EllipticityError):
            diagonalize_quadratic(monomial(1.0, p=(4, 0)))
        with self.assertRaises(EllipticityError):
            diagonalize_quadratic(oscillators(nu=(-1.0, -1.0)))

    def test_laplace_lagrange_frequencies(self):
        entry = make_entry()
        h = expand_hamiltonian(entry, SMALL)
        D = diagonalize_quadratic(average_order1(h))
        _, nu = laplace_lagrange_matrix(entry, Lambda_star=h.Lambda_star)
        np.testing.assert_allclose(np.sort(D.nu), np.sort(nu), rtol=1e-7)
        # mode 1 lives mostly on the inner planet
        self.assertGreater(D.matrix[0, 0] ** 2 + D.matrix[2, 0] ** 2, 0.5)


class ActionAngleTests(SimpleTestCase):
    policy = action_policy(8)

    def test_single_action(self):
        f = to_action_angle(monomial(0.5, p=(2, 0)) + monomial(0.5, q=(2, 0)), self.policy)
        self.assertEqual(len(f), 1)
        self.assertAlmostEqual(f.coefficient(l=(2, 0)), 0.5, places=15)

    def test_coupling_depends_on_angle_difference(self):
        f = to_action_angle(monomial(1.0, p=(1, 1)) + monomial(1.0, q=(1, 1)), self.policy)
        self.assertEqual(len(f), 1)
        self.assertAlmostEqual(f.coefficient(l=(1, 1), k=(1, -1), parity=COS), 1.0, places=15)

    def test_values_agree_with_cartesian_form(self):
        rng = np.random.default_rng(4)
        f = random_even_series(rng, degree=6)
        g = to_action_angle(f, self.policy)
        x, y = rng.normal(size=(2, 20)), rng.normal(size=(2, 20))
        rho, phi = polar(x, y)
        np.testing.assert_allclose(evaluate_action_angle(g, rho, phi), evaluate(f, xi=x, eta=y), atol=1e-11)
        back = cartesian(rho, phi)
        np.testing.assert_allclose(back[0], x, atol=1e-13)
        np.testing.assert_allclose(back[1], y, atol=1e-13)

    def test_odd_series_rejected(self):
        with self.assertRaises(ValueError):
            to_action_angle(monomial(1.0, p=(1, 0)))

    def test_canonical_pair(self):
        base = cartesian_functions(self.policy)
        bracket = action_bracket(base['x1'], base['y1'])
        self.assertEqual(len(bracket), 1)
        self.assertAlmostEqual(bracket.coefficient(), 1.0, places=15)
        self.assertTrue(action_bracket(base['x1'], base['y2']).is_zero())

    def test_action_generates_rotation(self):
        base = cartesian_functions(self.policy)
        action = to_action_angle(monomial(0.5, p=(2, 0)) + monomial(0.5, q=(2, 0)), self.policy)
        # {I1, x1} = -y1 and {I1, y1} = x1
        self.assertLessEqual((action_bracket(action, base['x1']) + base['y1']).max_abs(), 1e-15)
        self.assertLessEqual((action_bracket(action, base['y1']) - base['x1']).max_abs(), 1e-15)

    def test_bracket_matches_cartesian_bracket(self):
        rng = np.random.default_rng(9)
        f, g = random_even_series(rng, degree=4), random_even_series(rng, degree=4)
        expected = to_action_angle(poisson_bracket(f, g), self.policy)
        value = action_bracket(to_action_angle(f, self.policy), to_action_angle(g, self.policy), self.policy)
        self.assertLessEqual((value - expected).max_abs(), 1e-12 * expected.max_abs())


class BirkhoffTests(SimpleTestCase):
    def normalize(self, f, r, nu=NU):
        return birkhoff_normalize(to_action_angle(f, action_policy(r + 2)), nu, r)

    def test_linear_oscillators_are_normal(self):
        B = self.normalize(oscillators(), 4)
        self.assertTrue(all(chi.is_zero() for chi in B.X))
        self.assertTrue(all(z.is_zero() for z in B.Z[1:]))
        np.testing.assert_allclose(secular_frequencies(B, (0.3, 0.1)).phi_dot, NU, rtol=1e-15)

    def test_quartic_frequency_shift(self):
        eps = 0.01
        B = self.normalize(oscillators() + monomial(eps, p=(4, 0)), 2)
        self.assertAlmostEqual(B.Z[2].coefficient(l=(4, 0)) / (3 * eps / 8), 1.0, places=12)
        self.assertEqual(len(B.Z[2]), 1)
        I = (0.2, 0.05)
        freq = secular_frequencies(B, I)
        self.assertAlmostEqual(freq.phi_dot[0], NU[0] + 3 * eps * I[0], places=12)
        self.assertAlmostEqual(freq.phi_dot[1], NU[1], places=12)
        self.assertEqual(freq.dpomega_rate, freq.phi_dot[0] - freq.phi_dot[1])
        self.assertAlmostEqual(freq.period, 2 * np.pi / abs(freq.dpomega_rate))

    def test_odd_orders_are_empty(self):
        f = oscillators() + monomial(0.01, p=(2, 2)) + monomial(-0.02, p=(1, 1), q=(1, 1)) + monomial(0.003, q=(3, 3))
        B = self.normalize(f, 4)
        for s in (1, 3):
            self.assertTrue(B.Z[s].is_zero())
            self.assertTrue(B.X[s - 1].is_zero())
        self.assertFalse(B.X[1].is_zero())
        self.assertEqual(len(B.report), 4)

    def test_transformation_roundtrip(self):
        f = oscillators() + monomial(0.01, p=(2, 2)) + monomial(0.02, p=(1, 1), q=(1, 1))
        B = self.normalize(f, 4)
        x, y = np.array([0.1, -0.05]), np.array([0.02, 0.08])
        back = B.from_normalized(*B.to_normalized(x, y))
        np.testing.assert_allclose(back[0], x, atol=1e-9)
        np.testing.assert_allclose(back[1], y, atol=1e-9)

    def test_resonant_frequencies_rejected(self):
        with self.assertRaises(ResonantDivisorError):
            self.normalize(oscillators(nu=(-1.0, -1.0)) + monomial(0.01, p=(2, 2)), 2, nu=(-1.0, -1.0))

    def test_growth_window(self):
        self.assertIsNone(_growth_start([(2, 1.0), (4, 0.5), (6, 0.6), (8, 0.2)]))
        self.assertEqual(_growth_start([(2, 1.0), (4, 0.5), (6, 0.6), (8, 0.7), (10, 0.9)]), 4)

    def test_frequency_identity_enforced(self):
        with self.assertRaises(ValueError):
            SecularFrequencies(phi_dot=np.array([1.0, 0.5]), dpomega_rate=0.4, period=1.0)

    def test_secular_hamiltonian(self):
        h_sec = average_order1(expand_hamiltonian(make_entry(), SMALL))
        D, B = normalize_secular(h_sec, r=4)
        self.assertTrue(harmonics_on_difference(B))
        for s in (1, 3):
            self.assertTrue(B.Z[s].is_zero())
        np.testing.assert_allclose(secular_frequencies(B, (0.0, 0.0)).phi_dot, D.nu, rtol=1e-9)
