from unittest import skipUnless

import numpy as np
from django.conf import settings
from django.test import SimpleTestCase

from kepler.catalog import get_system
from kepler.elements import elements_to_poincare
from kepler.hamiltonian import DEFAULT_POLICY, expand_hamiltonian
from kepler.tests import SMALL, make_entry
from normalform.kolmogorov import averaged_policy, kolmogorov_order2
from normalform.resonance import ResonanceChoice, select_resonance
from series.core import COS, SIN, PoissonSeries, TruncationPolicy, scale
from series.exceptions import DegenerateRadiusError

from .delta import (
    IN_MMR, NEAR_MMR, SECULAR, HarmonicTerm, choose_rho, classify, delta_functions, delta_parameter,
    divisor_floor_report, harmonic_terms, proximity_report,
)

POLICY = TruncationPolicy(max_L_degree=1, max_sec_degree=4, max_trig_degree=8)
LOW = ResonanceChoice(k_star=(1, -4), K_F=4, K_S=2, small_divisor=0.0)


def term(coef, p=(0, 0), q=(0, 0), k=(0, 0), parity=COS):
    return PoissonSeries.monomial(coef, POLICY, p=p, q=q, k=k, parity=parity)


class DeltaFunctionTests(SimpleTestCase):
    def test_single_monomial(self):
        chi = term(0.25, p=(1, 0), q=(1, 0), k=(1, -2), parity=SIN)
        functions = delta_functions(chi)
        for name in ('dxi1', 'deta1'):
            f = functions[name]
            self.assertEqual(len(f), 1)
            self.assertEqual(f.coefficient(k=(1, -2), parity=SIN), 0.25)
            self.assertTrue(functions.residual[name].is_zero())
        self.assertTrue(functions['dxi2'].is_zero())
        self.assertTrue(functions['deta2'].is_zero())

    def test_zero_generating_function(self):
        functions = delta_functions(PoissonSeries.zero(POLICY))
        for name in ('dxi1', 'dxi2', 'deta1', 'deta2'):
            self.assertTrue(functions[name].is_zero())
            self.assertTrue(functions.residual[name].is_zero())

    def test_undivisible_terms_are_set_aside(self):
        chi = term(0.5, q=(2, 0), k=(1, -3)) + term(0.1, p=(1, 1), k=(1, -3), parity=SIN)
        functions = delta_functions(chi)
        residual = functions.residual['dxi1']
        self.assertEqual(residual.coefficient(q=(1, 0), k=(1, -3)), 1.0)
        self.assertTrue(functions['dxi1'].is_zero())
        self.assertEqual(functions['deta1'].coefficient(p=(0, 1), k=(1, -3), parity=SIN), 0.0)
        self.assertEqual(functions.residual['deta1'].coefficient(p=(0, 1), k=(1, -3), parity=SIN), 0.1)


class HarmonicNormTests(SimpleTestCase):
    def test_parities_add_up(self):
        f = term(0.3, p=(1, 0), k=(1, -5)) + term(-0.1, q=(0, 1), k=(1, -5), parity=SIN) + term(0.2, k=(0, 1))
        terms = harmonic_terms(f, (2.0, 3.0))
        self.assertEqual(terms[0].k, (1, -5))
        self.assertAlmostEqual(terms[0].norm, 0.3 * 2.0 + 0.1 * 3.0)
        self.assertEqual(terms[0].parity, COS)
        self.assertEqual(terms[1].k, (0, 1))

    def test_labels(self):
        self.assertEqual(HarmonicTerm((1, -5), COS, 1.0).label(), 'cos(lambda1-5lambda2)')
        self.assertEqual(HarmonicTerm((1, -2), SIN, 1.0).label(), 'sin(lambda1-2lambda2)')
        self.assertEqual(HarmonicTerm((0, 3), COS, 1.0).label(), 'cos(3lambda2)')

    def test_norms_grow_with_radii(self):
        f = term(0.3, p=(1, 0), k=(1, -5)) + term(0.2, q=(1, 1), k=(2, -1), parity=SIN)
        small = {t.k: t.norm for t in harmonic_terms(f, (0.1, 0.2))}
        large = {t.k: t.norm for t in harmonic_terms(f, (0.1, 0.3))}
        for k, value in small.items():
            self.assertGreaterEqual(large[k], value)


class ClassificationTests(SimpleTestCase):
    def test_boundaries_go_to_the_less_resonant_class(self):
        self.assertEqual(classify(1e-4), SECULAR)
        self.assertEqual(classify(2.6e-3), SECULAR)
        self.assertEqual(classify(2.61e-3), NEAR_MMR)
        self.assertEqual(classify(2.6e-2), NEAR_MMR)
        self.assertEqual(classify(2.61e-2), IN_MMR)

    def test_divisor_floor_report(self):
        report = divisor_floor_report(LOW, (0.1, 0.1))
        self.assertEqual(report.label, IN_MMR)
        self.assertEqual(report.delta, float('inf'))
        self.assertEqual(report.k_star, (1, -4))
        self.assertIsNone(report.dominant(1))


class RadiusTests(SimpleTestCase):
    def test_radii_of_the_initial_state(self):
        entry = make_entry()
        state = elements_to_poincare(entry)
        rho = choose_rho(entry, scale=1.0)
        np.testing.assert_allclose(rho, np.hypot(state.xi, state.eta), rtol=1e-15)
        np.testing.assert_allclose(choose_rho(entry, scale=2.0), 2 * np.array(rho), rtol=1e-15)

    def test_doubling_eccentricities_doubles_radii(self):
        small = choose_rho(make_entry(e1=0.005, e2=0.01), scale=1.0)
        large = choose_rho(make_entry(e1=0.01, e2=0.02), scale=1.0)
        np.testing.assert_allclose(np.array(large) / np.array(small), 2.0, rtol=1e-4)

    def test_circular_orbit(self):
        entry = make_entry(e2=0.0)
        with self.assertRaises(DegenerateRadiusError):
            choose_rho(entry)
        rho = choose_rho(entry, floor=(0.0, 1e-3))
        self.assertEqual(rho[1], 1e-3)
        self.assertGreater(rho[0], 0.0)
        with self.assertRaises(ValueError):
            choose_rho(entry, scale=0.0, floor=1e-3)


class ProximityReportTests(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.entry = make_entry()
        _, cls.gen = kolmogorov_order2(expand_hamiltonian(cls.entry, SMALL), LOW)
        cls.rho = choose_rho(cls.entry)
        cls.report = proximity_report(cls.gen, cls.rho)

    def test_definitions(self):
        report = self.report
        self.assertEqual(report.delta1, min(report.star('dxi1'), report.star('deta1')))
        self.assertEqual(report.delta2, min(report.star('dxi2'), report.star('deta2')))
        self.assertEqual(report.delta, max(report.delta1, report.delta2))
        self.assertEqual(report.label, classify(report.delta))
        self.assertEqual(report.delta, delta_parameter(self.gen.chi1, self.rho))
        self.assertEqual(report.k_star, LOW.k_star)
        for terms in report.top.values():
            self.assertLessEqual(len(terms), 3)
            self.assertEqual([t.norm for t in terms], sorted((t.norm for t in terms), reverse=True))
        self.assertEqual(report.dominant(1).norm, report.delta1)

    def test_homogeneous_in_the_generating_function(self):
        scaled = proximity_report(scale(self.gen.chi1, -3.0), self.rho)
        self.assertAlmostEqual(scaled.delta / self.report.delta, 3.0, places=12)
        self.assertEqual(scaled.top['dxi1'][0].k, self.report.top['dxi1'][0].k)

    def test_larger_radii_never_decrease_the_norms(self):
        wider = proximity_report(self.gen, (self.rho[0] * 1.5, self.rho[1]))
        for name, terms in self.report.top.items():
            self.assertGreaterEqual(wider.star(name), self.report.star(name))


@skipUnless(settings.SECRES['RUN_ACCEPTANCE'], 'long proximity reproduction')
class CatalogProximityTests(SimpleTestCase):
    """Magnitudes within 15% and dominant harmonics of three catalog systems."""

    CASES = {
        'ups_And': (1.009e-2, 8.724e-3, (1, -5), NEAR_MMR),
        'HD169830': (1.119e-2, 2.316e-2, (1, -9), NEAR_MMR),
        'HD128311': (6.421e-1, 1.646e-1, (1, -2), IN_MMR),
    }

    def test_spot_checks(self):
        for name, (delta1, delta2, k, label) in self.CASES.items():
            with self.subTest(system=name):
                entry = get_system(name)
                H = expand_hamiltonian(entry, DEFAULT_POLICY)
                _, gen = kolmogorov_order2(
                    H, select_resonance(H.n_star), second_policy=averaged_policy(H.policy), check_identity=False,
                )
                report = proximity_report(gen, choose_rho(entry))
                self.assertAlmostEqual(report.delta1 / delta1, 1.0, delta=0.15)
                self.assertAlmostEqual(report.delta2 / delta2, 1.0, delta=0.15)
                self.assertEqual(report.dominant(1).k, k)
                self.assertEqual(report.label, label)
