import numpy as np
from pslab.bms import (bms_sample, convention_check, gromov_density, hopf_action_check,
                       invariance_residual)
from pslab.cartan import Functional, RootSubset, istar
from pslab.convexity import hilbert_functional
from pslab.exceptions import NoTransversePairs
from pslab.flags import TransversePair, standard_flag
from pslab.shadows import AtomicMeasure, patterson_construct
from pslab.test_utils.fixtures import OrbitFixture, RandomFixture
from pslab.test_utils.testcase import PslabTestCase
from pslab.utils import random_flag, random_orthogonal, random_sl


class InvarianceTests(RandomFixture, PslabTestCase):
    def random_pair(self, dim):
        return TransversePair(random_flag(self.rng, dim), random_flag(self.rng, dim))

    def test_invariance(self):
        for dim in (3, 4):
            phi = Functional(self.rng.uniform(0.1, 1.0, size=dim - 1))
            for _ in range(10):
                g = random_sl(self.rng, dim, 1.5)
                self.assertLess(invariance_residual(g, self.random_pair(dim), phi), 1e-8)

    def test_convention(self):
        phi = Functional.weight(3, 1)
        checks = [convention_check(random_sl(self.rng, 3), self.random_pair(3), phi)
                  for _ in range(5)]
        for check in checks:
            self.assertEqual(check['selected'], 'istar_on_eta')
            self.assertLess(check['istar_on_eta'], 1e-8)
        self.assertGreater(max(check['istar_on_xi'] for check in checks), 1e-3)

    def test_symmetric_functional(self):
        phi = hilbert_functional(4)
        self.assertEqual(istar(phi), phi)
        check = convention_check(random_sl(self.rng, 4), self.random_pair(4), phi)
        self.assertAlmostEqual(check['istar_on_eta'], check['istar_on_xi'], places=12)

    def test_standard_density(self):
        self.assertAlmostEqual(gromov_density(TransversePair.standard(3), Functional.weight(3, 1),
                                              1.5), 1.0, places=12)

    def test_swap(self):
        for dim in (3, 4):
            phi = Functional(self.rng.uniform(0.1, 1.0, size=dim - 1))
            for _ in range(5):
                pair = self.random_pair(dim)
                self.assertAlmostEqual(np.log(gromov_density(pair.swap(), phi, 1.0)),
                                       np.log(gromov_density(pair, istar(phi), 1.0)), delta=1e-8)

    def test_orthogonal(self):
        phi = Functional([0.75, 0.25])
        for _ in range(5):
            k, pair = random_orthogonal(self.rng, 3), self.random_pair(3)
            self.assertLess(invariance_residual(k, pair, phi), 1e-8)
            self.assertAlmostEqual(np.log(gromov_density(pair.translate(k), phi, 1.0)),
                                   np.log(gromov_density(pair, phi, 1.0)), delta=1e-8)

    def test_hopf_action(self):
        for dim in (3, 4):
            g, h = random_sl(self.rng, dim), random_sl(self.rng, dim)
            self.assertLess(hopf_action_check(g, h), 1e-8)


class SampleTests(OrbitFixture, PslabTestCase):
    orbit_keys = ('dense',)

    def setUp(self):
        super(SampleTests, self).setUp()
        orbit, full = self.orbits['dense'], RootSubset.full(3)
        self.phi = Functional.weight(3, 1)
        self.mu_phi = patterson_construct(orbit, self.phi, 0.3, full)
        self.mu_istar = patterson_construct(orbit, istar(self.phi), 0.3, full)

    def test_sample(self):
        sample = bms_sample(self.mu_phi, self.mu_istar, 10, self.phi, 0.3)
        self.assertEqual(len(sample), 10)
        self.assertEqual(sample.provenance['checked'], 32 * 32)
        self.assertTrue(0 < sample.transverse_fraction <= 1)
        self.assertTrue(np.all(sample.densities > 0))
        self.assertTrue(sample.as_dict()['finite'])
        self.assertTrue(np.all(np.diff(sample.weights) <= 0))

    def test_partial_measures(self):
        with self.assertRaises(ValueError):
            bms_sample(self.mu_phi.restrict(RootSubset(3, [1])), self.mu_istar, 10, self.phi, 0.3)

    def test_no_transverse_pairs(self):
        point = AtomicMeasure.from_flags([standard_flag(3)], [1.0])
        with self.assertRaises(NoTransversePairs):
            bms_sample(point, point, 5, self.phi, 0.3)
