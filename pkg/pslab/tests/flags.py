import numpy as np
from pslab.cartan import CartanVector, RootSubset, opposition
from pslab.elements import GroupElement
from pslab.exceptions import DegenerateGap, NotTransverse
from pslab.fixtures import load_fixture
from pslab.flags import (PartialFlag, TransversePair, attracting_flag, canonicalize,
                         cocycle_weights, construct_witness, flag_distance, gromov_product, hopf,
                         iwasawa_cocycle, longest_element, north_south_trace, opposite_flag,
                         partial_iwasawa, quint_residual, standard_flag, translate, transverse,
                         u_theta)
from pslab.test_utils.fixtures import RandomFixture
from pslab.test_utils.testcase import PslabTestCase
from pslab.utils import random_flag, random_orthogonal, random_sl


class LongestElementTests(PslabTestCase):
    def test_representative(self):
        for dim in range(2, 8):
            w0 = longest_element(dim)
            self.assertAlmostEqual(np.linalg.det(w0), 1.0, places=12)
            self.assertVectorAlmostEqual(w0.T @ w0, np.eye(dim), 0)
            expected = -np.eye(dim) if dim % 4 == 2 else np.eye(dim)
            self.assertVectorAlmostEqual(w0 @ w0, expected, 0)

    def test_standard_pair(self):
        for dim in (2, 3, 4):
            self.assertTrue(transverse(standard_flag(dim), opposite_flag(dim)))
            self.assertFalse(transverse(standard_flag(dim), standard_flag(dim)))


class PartialFlagTests(RandomFixture, PslabTestCase):
    def test_canonical_frames(self):
        frame = random_orthogonal(self.rng, 4)
        flipped = frame * np.array([-1.0, 1.0, -1.0, -1.0])
        self.assertVectorAlmostEqual(canonicalize(frame), canonicalize(flipped), 0)
        self.assertEqual(PartialFlag(RootSubset.full(4), frame),
                         PartialFlag(RootSubset.full(4), flipped))

    def test_invalid_frame(self):
        with self.assertRaises(ValueError):
            PartialFlag(RootSubset.full(3), np.eye(4))
        with self.assertRaises(ValueError):
            PartialFlag(RootSubset.full(3), 2 * np.eye(3))

    def test_restrict_and_lift(self):
        theta = RootSubset(4, [1, 3])
        flag = random_flag(self.rng, 4).restrict(theta)
        lifted = flag.lift(self.rng)
        self.assertTrue(lifted.is_full)
        self.assertFlagAlmostEqual(lifted.restrict(theta), flag, 1e-12)
        with self.assertRaises(ValueError):
            flag.restrict(RootSubset(4, [2]))

    def test_serialization(self):
        flag = random_flag(self.rng, 3, RootSubset(3, [2]))
        self.assertEqual(PartialFlag.from_dict(flag.as_dict()), flag)


class UThetaTests(PslabTestCase):
    def test_diagonal(self):
        g = GroupElement(np.diag(np.exp([2.0, 0.0, -2.0])))
        self.assertFlagAlmostEqual(u_theta(g, RootSubset.full(3)), standard_flag(3), 1e-12)

    def test_degenerate_gap(self):
        g = GroupElement(np.diag(np.exp([1.0, 1.0, -2.0])))
        with self.assertRaises(DegenerateGap) as context:
            u_theta(g, RootSubset.full(3))
        self.assertEqual(context.exception.index, 1)
        flag = u_theta(g, RootSubset(3, [2]))
        self.assertFlagAlmostEqual(flag, standard_flag(3, RootSubset(3, [2])), 1e-12)


class TranslationTests(RandomFixture, PslabTestCase):
    def test_borel_fixes_standard_flag(self):
        for scale in (1.0, 6.0):
            matrix = np.diag(np.exp([scale, 0.0, -scale]))
            matrix[0, 1], matrix[0, 2], matrix[1, 2] = 1.0, -2.0, 3.0
            flag = translate(GroupElement(matrix), standard_flag(3))
            self.assertFlagAlmostEqual(flag, standard_flag(3), 1e-8)

    def test_large_spread(self):
        k, l = random_orthogonal(self.rng, 3), random_orthogonal(self.rng, 3)
        H = np.array([6.0, 0.5, -6.5])
        g = GroupElement(k @ np.diag(np.exp(H)) @ l, l.T @ np.diag(np.exp(-H)) @ k.T)
        x = random_flag(self.rng, 3)
        q, _ = np.linalg.qr(g.matrix @ x.frame)
        expected = PartialFlag(x.theta, canonicalize(q), check=False)
        self.assertFlagAlmostEqual(translate(g, x), expected, 1e-7)

    def test_action(self):
        for dim in (3, 4):
            g, h = random_sl(self.rng, dim), random_sl(self.rng, dim)
            x = random_flag(self.rng, dim)
            self.assertFlagAlmostEqual(translate(g * h, x), translate(g, translate(h, x)))


class CocycleTests(RandomFixture, PslabTestCase):
    def test_diagonal(self):
        H = np.array([0.3, -1.0, 0.7])
        g = GroupElement(np.diag(np.exp(H)))
        self.assertVectorAlmostEqual(iwasawa_cocycle(g, standard_flag(3)), H, 1e-10)

    def test_orthogonal(self):
        k = random_orthogonal(self.rng, 4)
        self.assertVectorAlmostEqual(iwasawa_cocycle(k, random_flag(self.rng, 4)), np.zeros(4))

    def test_additivity(self):
        for dim in (3, 4):
            for _ in range(20):
                g, h = random_sl(self.rng, dim, 1.5), random_sl(self.rng, dim, 1.5)
                x = random_flag(self.rng, dim)
                expected = (np.asarray(iwasawa_cocycle(g, translate(h, x)))
                            + np.asarray(iwasawa_cocycle(h, x)))
                self.assertVectorAlmostEqual(iwasawa_cocycle(g * h, x), expected, 1e-9)

    def test_weights_below_cartan(self):
        for dim in (3, 4):
            for _ in range(20):
                g = random_sl(self.rng, dim, 2.0)
                frames = np.stack([random_orthogonal(self.rng, dim) for _ in range(10)])
                bound = np.cumsum(np.asarray(g.cartan))[:-1]
                self.assertTrue(np.all(cocycle_weights(g, frames) <= bound + 1e-8))

    def test_partial_additivity(self):
        theta = RootSubset(3, [1])
        for _ in range(20):
            g, h = random_sl(self.rng, 3, 1.5), random_sl(self.rng, 3, 1.5)
            x = random_flag(self.rng, 3).restrict(theta)
            expected = (np.asarray(partial_iwasawa(g, translate(h, x)))
                        + np.asarray(partial_iwasawa(h, x)))
            self.assertVectorAlmostEqual(partial_iwasawa(g * h, x), expected, 1e-8)

    def test_qr_agrees_when_well_conditioned(self):
        g = random_sl(self.rng, 3, 0.5)
        x = random_flag(self.rng, 3)
        self.assertVectorAlmostEqual(iwasawa_cocycle(g, x, method='qr'), iwasawa_cocycle(g, x),
                                     1e-10)
        with self.assertRaises(ValueError):
            iwasawa_cocycle(g, x, method='foo')

    def test_partial_flags(self):
        theta = RootSubset(3, [1])
        g = random_sl(self.rng, 3)
        x = random_flag(self.rng, 3).restrict(theta)
        with self.assertRaises(ValueError):
            iwasawa_cocycle(g, x)
        reference = partial_iwasawa(g, x)
        for _ in range(5):
            self.assertVectorAlmostEqual(partial_iwasawa(g, x, rng=self.rng), reference)


class GromovTests(RandomFixture, PslabTestCase):
    def random_pair(self, dim):
        return TransversePair(random_flag(self.rng, dim), random_flag(self.rng, dim))

    def test_standard_pair(self):
        self.assertVectorAlmostEqual(gromov_product(TransversePair.standard(3)), np.zeros(3))

    def test_not_transverse(self):
        with self.assertRaises(NotTransverse):
            TransversePair(standard_flag(3), standard_flag(3))
        with self.assertRaises(ValueError):
            TransversePair(standard_flag(3, RootSubset(3, [1])), standard_flag(3, RootSubset(3, [1])))

    def test_witness(self):
        for dim in (3, 4):
            pair = self.random_pair(dim)
            witness = construct_witness(pair.xi, pair.eta)
            self.assertAlmostEqual(witness.determinant, 1.0, places=9)
            self.assertFlagAlmostEqual(translate(witness, standard_flag(dim)), pair.xi)
            self.assertFlagAlmostEqual(translate(witness, opposite_flag(dim)), pair.eta)
            swapped = TransversePair(pair.xi, pair.eta, witness).swap()
            self.assertFlagAlmostEqual(translate(swapped.witness, standard_flag(dim)), pair.eta)

    def test_witness_independence(self):
        for dim in (3, 4):
            pair = self.random_pair(dim)
            H = self.rng.normal(size=dim)
            H -= H.mean()
            shifted = construct_witness(pair.xi, pair.eta) * GroupElement(np.diag(np.exp(H)))
            self.assertVectorAlmostEqual(gromov_product(TransversePair(pair.xi, pair.eta, shifted)),
                                         gromov_product(pair), 1e-9)

    def test_translation(self):
        for dim in (3, 4):
            pair = self.random_pair(dim)
            g = random_sl(self.rng, dim)
            moved = pair.translate(g)
            expected = (np.asarray(gromov_product(pair)) + np.asarray(iwasawa_cocycle(g, pair.xi))
                        + np.asarray(opposition(iwasawa_cocycle(g, pair.eta))))
            self.assertVectorAlmostEqual(gromov_product(moved), expected, 1e-8)


class HopfTests(RandomFixture, PslabTestCase):
    def test_identity(self):
        xi, eta, H = hopf(GroupElement.identity(3))
        self.assertFlagAlmostEqual(xi, standard_flag(3), 1e-12)
        self.assertFlagAlmostEqual(eta, opposite_flag(3), 1e-12)
        self.assertVectorAlmostEqual(H, CartanVector.zero(3), 1e-12)

    def test_coordinates(self):
        g = random_sl(self.rng, 4)
        xi, eta, H = hopf(g)
        self.assertTrue(transverse(xi, eta))
        self.assertFlagAlmostEqual(xi, translate(g, standard_flag(4)))
        self.assertVectorAlmostEqual(H, iwasawa_cocycle(g, standard_flag(4)))
        self.assertEqual(flag_distance(xi, xi), 0.0)


class FlagDistanceTests(RandomFixture, PslabTestCase):
    def test_triangle_inequality(self):
        for theta in (RootSubset.full(4), RootSubset(4, [2])):
            for _ in range(50):
                x, y, z = (random_flag(self.rng, 4, theta) for _ in range(3))
                self.assertLessEqual(flag_distance(x, z),
                                     flag_distance(x, y) + flag_distance(y, z) + 1e-12)

    def test_orthogonal_invariance(self):
        for _ in range(20):
            x, y = random_flag(self.rng, 3), random_flag(self.rng, 3)
            k = random_orthogonal(self.rng, 3)
            self.assertAlmostEqual(flag_distance(translate(k, x), translate(k, y)),
                                   flag_distance(x, y), delta=1e-10)


class DynamicsTests(RandomFixture, PslabTestCase):
    def setUp(self):
        super(DynamicsTests, self).setUp()
        self.full = RootSubset.full(3)
        self.diagonal = GroupElement(np.diag(np.exp([2.0, 0.0, -2.0])))

    def test_attracting_flag(self):
        self.assertFlagAlmostEqual(attracting_flag(self.diagonal, self.full), standard_flag(3),
                                   1e-12)
        self.assertFlagAlmostEqual(attracting_flag(self.diagonal.inv(), self.full.istar()),
                                   opposite_flag(3), 1e-12)
        conjugator = random_sl(self.rng, 3, 0.5)
        g = conjugator * self.diagonal * conjugator.inv()
        self.assertFlagAlmostEqual(attracting_flag(g, self.full),
                                   translate(conjugator, standard_flag(3)), 1e-8)
        theta = RootSubset(3, [1])
        self.assertFlagAlmostEqual(attracting_flag(g, theta),
                                   translate(conjugator, standard_flag(3, theta)), 1e-8)

    def test_rotation(self):
        c, s = np.cos(0.4), np.sin(0.4)
        rotation = GroupElement(np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]]))
        with self.assertRaises(DegenerateGap):
            attracting_flag(rotation, self.full)

    def test_quint_limit(self):
        generators = load_fixture('F3')
        word = 'ab' * 6
        prefixes = [generators.evaluate(word[:n]) for n in range(1, len(word) + 1)]
        for letter in generators.alphabet:
            residuals = quint_residual(generators.letter(letter), prefixes, self.full)
            self.assertEqual(residuals.shape, (12,))
            self.assertFalse(np.isnan(residuals).any())
            self.assertLess(residuals[-1], 1e-3)

    def test_quint_degenerate(self):
        flat = GroupElement(np.diag(np.exp([1.0, 1.0, -2.0])))
        residuals = quint_residual(self.diagonal, [flat, self.diagonal], self.full)
        self.assertTrue(np.isnan(residuals[0]))
        self.assertAlmostEqual(residuals[1], 0.0, delta=1e-12)

    def test_north_south(self):
        generators = load_fixture('F3')
        for label in generators.labels:
            trace = north_south_trace(generators.letter(label), random_flag(self.rng, 3), 12)
            self.assertEqual(len(trace['distances']), 13)
            self.assertLess(trace['distances'][-1], 1e-8)
            self.assertLess(trace['rate'], 0.1)
            self.assertLess(trace['expected_rate'], 0.1)
            self.assertEqual(trace['word'], label)

    def test_north_south_fixed(self):
        trace = north_south_trace(self.diagonal, standard_flag(3), 3)
        self.assertLess(max(trace['distances']), 1e-12)
        self.assertIsNone(trace['rate'])
        self.assertAlmostEqual(trace['expected_rate'], np.exp(-2.0), places=12)
        with self.assertRaises(NotTransverse):
            north_south_trace(self.diagonal, opposite_flag(3), 3)
