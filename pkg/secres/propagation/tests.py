import io
from unittest import skipUnless

import numpy as np
from django.conf import settings
from django.test import SimpleTestCase

from analysis.birkhoff import normalize_secular
from kepler.catalog import get_system
from kepler.elements import elements_to_poincare
from kepler.hamiltonian import DEFAULT_POLICY
from kepler.tests import SMALL, make_entry
from normalform.kolmogorov import SecularHamiltonian
from normalform.resonance import ResonanceChoice
from series.core import PoissonSeries, TruncationPolicy
from series.exceptions import DomainError

from .chain import (
    ANALYTIC_ORDER1, ANALYTIC_ORDER2, NUMERIC, SecularTrajectory, TransformChain, build_chain,
    check_uniform, default_t_end, dpomega_rate, initial_actions, propagate, read_trajectory,
    roundtrip_defect, secular_energy, time_grid, write_trajectory,
)

LOW = ResonanceChoice(k_star=(1, -4), K_F=4, K_S=2, small_divisor=0.0)
SECULAR = TruncationPolicy(max_L_degree=0, max_sec_degree=8, max_trig_degree=0)
NU = (-2.0e-4, -7.0e-5)


def oscillator_chain(entry, hamiltonian):
    """Order-one chain of a secular Hamiltonian that is already diagonal."""
    terms = []
    for j, nu in enumerate(NU):
        p = (2, 0) if j == 0 else (0, 2)
        terms += [PoissonSeries.monomial(nu / 2, SECULAR, p=p), PoissonSeries.monomial(nu / 2, SECULAR, q=p)]
    secular = SecularHamiltonian(series=sum(terms[1:], terms[0]), order=1)
    D, B = normalize_secular(secular, r=4)
    return TransformChain(entry=entry, order=1, hamiltonian=hamiltonian, secular=secular, diagonal=D, birkhoff=B)


class OrderOneChainTests(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.entry = make_entry()
        cls.chain = build_chain(cls.entry, order=1, policy=SMALL, birkhoff_order=4)
        cls.t = time_grid(default_t_end(cls.chain), 256)
        cls.trajectory = propagate(cls.entry, cls.chain, cls.t)

    def test_chain_layout(self):
        self.assertFalse(self.chain.is_trivial)
        self.assertFalse(self.chain.uses_T_O2)
        self.assertIsNone(self.chain.generators)
        self.assertEqual(self.chain.source, ANALYTIC_ORDER1)
        self.assertEqual(self.trajectory.source, ANALYTIC_ORDER1)

    def test_circular_orbits_have_zero_actions(self):
        entry = make_entry(e1=0.0, e2=0.0)
        chain = build_chain(entry, order=1, policy=SMALL, birkhoff_order=4)
        I0, _ = initial_actions(entry, chain)
        np.testing.assert_array_equal(I0, [0.0, 0.0])

    def test_diagonal_toy_actions(self):
        chain = oscillator_chain(self.entry, self.chain.hamiltonian)
        I0, _ = initial_actions(self.entry, chain)
        state = elements_to_poincare(self.entry)
        np.testing.assert_allclose(I0, (state.xi ** 2 + state.eta ** 2) / 2, rtol=1e-12)

    def test_dpomega_turns_at_the_normal_form_rate(self):
        chain = oscillator_chain(self.entry, self.chain.hamiltonian)
        trajectory = propagate(self.entry, chain, time_grid(default_t_end(chain), 400))
        rate = trajectory.frequencies.dpomega_rate
        self.assertAlmostEqual(rate, NU[0] - NU[1], delta=1e-12 * abs(rate))
        # varpi_j = -phi_j when the diagonalization is the identity
        self.assertAlmostEqual(dpomega_rate(trajectory) / -rate, 1.0, places=10)

    def test_initial_elements_are_recovered(self):
        defect = roundtrip_defect(self.entry, self.chain)
        self.assertLess(defect.secular, 1e-10)
        self.assertLess(defect.eccentricity, 1e-8)
        self.assertAlmostEqual(self.trajectory.e1[0], self.entry.planet(1).e, delta=1e-8)
        self.assertAlmostEqual(self.trajectory.e2[0], self.entry.planet(2).e, delta=1e-8)

    def test_eccentricities_oscillate(self):
        for e in (self.trajectory.e1, self.trajectory.e2):
            self.assertTrue(np.all((e >= 0) & (e < 1)))
            self.assertGreater(np.ptp(e), 1e-5)

    def test_energy_is_constant(self):
        # back-map truncation error scales as e**6
        entry = make_entry(e1=0.005, e2=0.01)
        chain = build_chain(entry, order=1, policy=SMALL, birkhoff_order=4)
        trajectory = propagate(entry, chain, self.t)
        energy = secular_energy(chain, trajectory) - chain.secular.constant
        self.assertLessEqual(np.ptp(energy), 1e-9 * np.max(np.abs(energy)))

    def test_independent_of_mean_anomalies(self):
        entry = make_entry(M=(2.0, 0.1))
        chain = build_chain(entry, order=1, policy=SMALL, birkhoff_order=4)
        other = propagate(entry, chain, self.t)
        np.testing.assert_array_equal(other.e1, self.trajectory.e1)
        np.testing.assert_array_equal(other.dpomega, self.trajectory.dpomega)

    def test_zero_perturbation_keeps_elements(self):
        entry = make_entry(m2=0.0)
        chain = build_chain(entry, order=2, policy=SMALL)
        self.assertTrue(chain.is_trivial)
        trajectory = propagate(entry, chain, time_grid(1e4, 16))
        np.testing.assert_allclose(trajectory.e1, entry.planet(1).e, rtol=1e-12)
        np.testing.assert_allclose(trajectory.e2, entry.planet(2).e, rtol=1e-12)
        np.testing.assert_allclose(trajectory.dpomega, trajectory.dpomega[0], atol=1e-15)
        self.assertEqual(trajectory.frequencies.period, float('inf'))

    def test_chain_of_another_system_rejected(self):
        with self.assertRaises(ValueError):
            initial_actions(make_entry(e1=0.05), self.chain)

    def test_order_must_be_one_or_two(self):
        with self.assertRaises(ValueError):
            build_chain(self.entry, order=3, policy=SMALL)


class OrderTwoChainTests(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.entry = make_entry()
        cls.chain = build_chain(cls.entry, order=2, policy=SMALL, resonance=LOW, birkhoff_order=4)

    def test_chain_layout(self):
        self.assertTrue(self.chain.uses_T_O2)
        self.assertEqual(self.chain.source, ANALYTIC_ORDER2)
        self.assertEqual(self.chain.secular.order, 2)
        self.assertEqual(set(self.chain.back_map), {'xi1', 'xi2', 'eta1', 'eta2'})

    def test_initial_elements_are_recovered(self):
        defect = roundtrip_defect(self.entry, self.chain)
        self.assertLess(defect.secular, 1e-8)
        self.assertLess(defect.eccentricity, 1e-8)

    def test_averaged_start_is_close_to_osculating(self):
        trajectory = propagate(self.entry, self.chain, time_grid(1e3, 8))
        self.assertNotEqual(trajectory.e1[0], self.entry.planet(1).e)
        self.assertLess(abs(trajectory.e1[0] - self.entry.planet(1).e), 1e-3)

    def test_depends_on_mean_anomalies(self):
        t = time_grid(1e4, 8)
        entry = make_entry(M=(2.0, 0.1))
        chain = build_chain(entry, order=2, policy=SMALL, resonance=LOW, birkhoff_order=4)
        first = propagate(self.entry, self.chain, t)
        second = propagate(entry, chain, t)
        self.assertFalse(np.array_equal(first.e1, second.e1))

    def test_order_one_from_normalized_initial_conditions(self):
        chain = build_chain(self.entry, order=1, policy=SMALL, resonance=LOW, birkhoff_order=4, transform_initial=True)
        plain = build_chain(self.entry, order=1, policy=SMALL, birkhoff_order=4)
        self.assertTrue(chain.uses_T_O2)
        self.assertEqual(chain.source, ANALYTIC_ORDER1)
        I_moved, _ = initial_actions(self.entry, chain)
        I_plain, _ = initial_actions(self.entry, plain)
        self.assertFalse(np.array_equal(I_moved, I_plain))
        np.testing.assert_allclose(I_moved, I_plain, rtol=0.1)


class TrajectoryFormatTests(SimpleTestCase):
    def trajectory(self, source=NUMERIC):
        return SecularTrajectory(
            times=np.array([0.0, 0.5, 1.0]), e1=np.array([0.1, 0.2, 1 / 3]),
            e2=np.array([0.0, 0.05, 0.1]), dpomega=np.array([0.0, -1.0, -7.5]), source=source,
        )

    def test_csv_roundtrip(self):
        stream = io.StringIO()
        write_trajectory(self.trajectory(), stream)
        lines = stream.getvalue().splitlines()
        self.assertEqual(lines[0], 't_yr,e1,e2,dpomega_rad,source')
        self.assertEqual(lines[3], '1,0.33333333333333331,0.10000000000000001,-7.5,numeric')
        stream.seek(0)
        back = read_trajectory(stream)
        np.testing.assert_array_equal(back.e1, self.trajectory().e1)
        self.assertEqual(back.source, NUMERIC)

    def test_mixed_sources_rejected(self):
        text = 't_yr,e1,e2,dpomega_rad,source\n0,0.1,0.1,0,numeric\n1,0.1,0.1,0,analytic-order1\n'
        with self.assertRaises(ValueError):
            read_trajectory(io.StringIO(text))
        with self.assertRaises(ValueError):
            read_trajectory(io.StringIO('t,e1\n0,0.1\n'))

    def test_invalid_trajectories(self):
        with self.assertRaises(ValueError):
            self.trajectory(source='fitted')
        with self.assertRaises(DomainError):
            SecularTrajectory(
                times=np.array([0.0, 1.0]), e1=np.array([0.1, 1.0]), e2=np.array([0.1, 0.1]),
                dpomega=np.zeros(2), source=NUMERIC,
            )

    def test_time_grid(self):
        t = time_grid(10.0, 11)
        self.assertEqual(len(t), 11)
        self.assertEqual(t[-1], 10.0)
        np.testing.assert_array_equal(check_uniform(t), t)
        with self.assertRaises(ValueError):
            check_uniform([0.0, 1.0, 3.0])
        with self.assertRaises(ValueError):
            time_grid(10.0, 1)
        with self.assertRaises(ValueError):
            time_grid(0.0, 10)


@skipUnless(settings.SECRES['RUN_ACCEPTANCE'], 'long secular-period reproduction')
class UpsAndromedaePeriodTests(SimpleTestCase):
    """Apsidal period of ups And for three truncations of the order-two normalization."""

    PERIODS = {(4, 2): 7132.0, (6, 4): 7035.0, (8, 6): 6998.0}

    def test_period_table(self):
        entry = get_system('ups_And')
        for (K_F, K_S), expected in self.PERIODS.items():
            with self.subTest(K_F=K_F, K_S=K_S):
                chain = build_chain(entry, order=2, policy=DEFAULT_POLICY, K_F=K_F, K_S=K_S)
                I0, _ = initial_actions(entry, chain)
                period = propagate(entry, chain, time_grid(1e4, 64)).frequencies.period
                self.assertAlmostEqual(period / expected, 1.0, delta=0.015)
                self.assertTrue(np.all(I0 >= 0))

    def test_energy_along_order_one_trajectory(self):
        entry = get_system('ups_And')
        chain = build_chain(entry, order=1, policy=DEFAULT_POLICY)
        trajectory = propagate(entry, chain, time_grid(default_t_end(chain), 512))
        energy = secular_energy(chain, trajectory) - chain.secular.constant
        # e near 0.3 leaves the degree-12 back-map truncation well above 1e-9
        self.assertLessEqual(np.ptp(energy), 1e-4 * np.max(np.abs(energy)))
        self.assertTrue(np.all(np.isfinite(trajectory.dpomega)))
