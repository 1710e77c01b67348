import numpy as np
from pslab.cartan import (CartanVector, Functional, RootSubset, cartan_decomposition,
                          cartan_projection, coweight, istar,
                          jordan_projection, opposition, pi_theta, root_eval, weight_eval)
from pslab.elements import GroupElement, random_reduced_word, reduce_word
from pslab.exceptions import SingularDecompositionFailure
from pslab.fixtures import load_fixture
from pslab.orbit import enumerate_orbit
from pslab.test_utils.data import CARTAN, SEED
from pslab.test_utils.fixtures import RandomFixture
from pslab.test_utils.testcase import PslabTestCase
from pslab.utils import make_rng, random_orthogonal, random_sl


class CartanVectorTests(PslabTestCase):
    def test_sum_zero(self):
        self.assertEqual(CartanVector([1, 0, -1]).dim, 3)
        with self.assertRaises(ValueError):
            CartanVector([1, 1, -1])

    def test_chamber(self):
        self.assertTrue(CartanVector([2, 0, -2], chamber=True).chamber)
        with self.assertRaises(ValueError):
            CartanVector([0, 2, -2], chamber=True)

    def test_arithmetic(self):
        first, second = CartanVector([2, 0, -2]), CartanVector([1, -2, 1])
        self.assertEqual((first + second).tolist(), [3, -2, -1])
        self.assertEqual((first - second).tolist(), [1, 2, -3])
        self.assertEqual((first * 2).tolist(), [4, 0, -4])
        self.assertEqual(first.sup_norm(), 2)
        self.assertEqual(first.distance(second), 3)
        self.assertEqual(CartanVector.zero(4).tolist(), [0, 0, 0, 0])

    def test_opposition(self):
        H = CartanVector([3, 1, -4], chamber=True)
        self.assertEqual(opposition(H).tolist(), [4, -1, -3])
        self.assertTrue(opposition(H).chamber)
        self.assertEqual(opposition(opposition(H)), H)


class FunctionalTests(PslabTestCase):
    def test_weights_and_roots(self):
        H = np.array([3.0, 1.0, -4.0])
        self.assertEqual(Functional.weight(3, 1)(H), 3.0)
        self.assertEqual(Functional.weight(3, 2)(H), 4.0)
        self.assertEqual(Functional.root(3, 1)(H), 2.0)
        self.assertEqual(Functional.root(3, 2)(H), 5.0)
        self.assertEqual(weight_eval(2, H), 4.0)
        self.assertEqual(root_eval(2, H), 5.0)

    def test_index_bounds(self):
        for index in (0, 3):
            with self.assertRaises(IndexError):
                Functional.weight(3, index)
            with self.assertRaises(IndexError):
                root_eval(index, [1, 0, -1])

    def test_vectorized(self):
        phi = Functional([1.0, 2.0])
        values = phi(np.array([[1, 0, -1], [2, -1, -1]]))
        self.assertEqual(values.tolist(), [1 + 2 * 1, 2 + 2 * 1])
        with self.assertRaises(ValueError):
            phi([1, -1])

    def test_diagonal(self):
        phi = Functional.from_diagonal([0.5, 0.0, -0.5])
        self.assertEqual(phi.tolist(), [0.5, 0.5])
        self.assertEqual(phi([2, 0, -2]), 2.0)
        self.assertEqual(phi.diagonal().tolist(), [1.0, 0.5, 0.0])

    def test_istar(self):
        phi = Functional([1.0, 2.0, 3.0])
        self.assertEqual(istar(phi).tolist(), [3.0, 2.0, 1.0])
        H = CartanVector([3, 1, -1, -3])
        self.assertAlmostEqual(istar(phi)(H), phi(opposition(H)), places=12)


class RootSubsetTests(PslabTestCase):
    def test_subset(self):
        theta = RootSubset(4, [3, 1])
        self.assertEqual(theta.tolist(), [1, 3])
        self.assertFalse(theta.is_full)
        self.assertIn(3, theta)
        self.assertTrue(RootSubset.full(4).is_full)
        self.assertEqual(RootSubset(4, [1]).istar(), RootSubset(4, [3]))

    def test_invalid(self):
        with self.assertRaises(ValueError):
            RootSubset(3, [])
        with self.assertRaises(IndexError):
            RootSubset(3, [3])


class ProjectionTests(RandomFixture, PslabTestCase):
    def test_known_values(self):
        for data in CARTAN:
            self.assertVectorAlmostEqual(cartan_projection(np.array(data.matrix, dtype=float)),
                                         data.kappa, 1e-12)

    def test_diagonal(self):
        H = np.array([1.5, 0.25, -1.75])
        self.assertVectorAlmostEqual(cartan_projection(np.diag(np.exp(H[::-1]))), H, 1e-12)
        self.assertVectorAlmostEqual(jordan_projection(np.diag(np.exp(H))), H, 1e-12)

    def test_bi_invariance(self):
        for dim in (3, 4):
            g = random_sl(self.rng, dim, scale=2.0)
            k, l = random_orthogonal(self.rng, dim), random_orthogonal(self.rng, dim)
            self.assertVectorAlmostEqual(cartan_projection(k @ g.matrix @ l), g.cartan, 1e-9)

    def test_inverse(self):
        for dim in (3, 4):
            for _ in range(200):
                g = random_sl(self.rng, dim, scale=3.0)
                self.assertVectorAlmostEqual(g.inv().cartan, opposition(g.cartan), 1e-8)

    def test_decomposition(self):
        for dim in (2, 3, 4, 5):
            for _ in range(20):
                g = random_sl(self.rng, dim)
                k, H, l = cartan_decomposition(g)
                self.assertVectorAlmostEqual(k.T @ k, np.eye(dim), 1e-12)
                self.assertVectorAlmostEqual(l @ l.T, np.eye(dim), 1e-12)
                self.assertVectorAlmostEqual(k @ np.diag(np.exp(np.asarray(H))) @ l, g.matrix,
                                             1e-9 * np.abs(g.matrix).max())

    def test_inverse_accuracy(self):
        """ Long products keep their small singular values """
        generators = load_fixture('F3')
        word = reduce_word(random_reduced_word(self.rng, generators.alphabet, 12))
        element = generators.evaluate(word)
        top = np.log(np.linalg.svd(element.matrix, compute_uv=False)[0])
        self.assertAlmostEqual(float(np.asarray(element.cartan).sum()), 0.0, places=9)
        self.assertVectorAlmostEqual(element.cartan[0], top, 1e-9 * top)
        self.assertVectorAlmostEqual(element.inv().cartan, opposition(element.cartan),
                                     1e-9 * top)

    def test_jordan_limit(self):
        H = np.array([1.0, 0.2, -1.2])
        conjugator = random_sl(self.rng, 3, scale=0.3)
        g = conjugator * GroupElement(np.diag(np.exp(H)), np.diag(np.exp(-H))) * conjugator.inv()
        self.assertVectorAlmostEqual(g.jordan, H, 1e-9)
        self.assertVectorAlmostEqual(np.asarray(g.power(100).cartan) / 100, H, 0.05)

    def test_singular(self):
        with self.assertRaises(SingularDecompositionFailure):
            cartan_projection(np.array([[1.0, 0.0], [0.0, 0.0]]))

    def test_element(self):
        g = GroupElement(np.diag([2.0, 0.5]))
        self.assertEqual(g.inverse.tolist(), [[0.5, 0.0], [0.0, 2.0]])
        self.assertVectorAlmostEqual(g.cartan, [np.log(2), -np.log(2)], 1e-12)

    def test_characteristic_polynomial(self):
        """ Spectra read off characteristic polynomial roots """
        for H in ([1.0, 0.2, -1.2], [2.5, 0.5, -0.75, -2.25]):
            H = np.array(H)
            dim = H.size
            for _ in range(5):
                k, l = random_orthogonal(self.rng, dim), random_orthogonal(self.rng, dim)
                g = GroupElement(k @ np.diag(np.exp(H)) @ l)
                roots = np.roots(np.poly(g.matrix.T @ g.matrix))
                self.assertVectorAlmostEqual(g.cartan, np.sort(0.5 * np.log(roots.real))[::-1],
                                             1e-9)
                conjugator = random_sl(self.rng, dim, scale=0.3)
                h = conjugator * GroupElement(np.diag(np.exp(H))) * conjugator.inv()
                roots = np.roots(np.poly(h.matrix))
                self.assertVectorAlmostEqual(h.jordan, np.sort(np.log(np.abs(roots)))[::-1],
                                             1e-9)

    def test_subadditivity(self):
        for dim in (3, 4):
            for _ in range(50):
                g, h = random_sl(self.rng, dim, scale=2.0), random_sl(self.rng, dim, scale=2.0)
                for j in range(1, dim):
                    self.assertLessEqual(weight_eval(j, (g * h).cartan),
                                         weight_eval(j, g.cartan) + weight_eval(j, h.cartan)
                                         + 1e-9)

    def test_adjoint_middle_entry(self):
        orbit = enumerate_orbit(load_fixture('F2'), 4)
        self.assertLess(np.abs(orbit.cartan[:, 1]).max(), 1e-8)
        self.assertVectorAlmostEqual(orbit.cartan[:, 0], -orbit.cartan[:, 2], 1e-8)


class PiThetaTests(PslabTestCase):
    def test_coweights(self):
        for dim in (3, 4, 5):
            for index in range(1, dim):
                H = coweight(dim, index)
                self.assertAlmostEqual(H.sum(), 0.0, places=12)
                for other in range(1, dim):
                    self.assertAlmostEqual(root_eval(other, H), float(other == index), places=12)

    def test_weight_matching(self):
        H = CartanVector([4, 1, -2, -3])
        for indices in ([1], [2], [1, 3], [1, 2, 3]):
            theta = RootSubset(4, indices)
            projected = pi_theta(H, theta)
            for j in theta:
                self.assertAlmostEqual(weight_eval(j, projected), weight_eval(j, H), places=10)
            for j in set(range(1, 4)) - set(indices):
                self.assertAlmostEqual(root_eval(j, projected), 0.0, places=10)

    def test_full(self):
        H = CartanVector([4, 1, -2, -3])
        self.assertVectorAlmostEqual(pi_theta(H, RootSubset.full(4)), H, 1e-10)

    def test_dimension_mismatch(self):
        with self.assertRaises(ValueError):
            pi_theta(CartanVector([1, 0, -1]), RootSubset(4, [1]))

    def test_idempotent(self):
        rng = make_rng(SEED)
        for dim in (3, 4, 5):
            for indices in ([1], [dim - 1], [1, dim - 1]):
                theta = RootSubset(dim, indices)
                for _ in range(10):
                    H = np.sort(rng.normal(size=dim))[::-1]
                    once = pi_theta(H - H.mean(), theta)
                    self.assertVectorAlmostEqual(pi_theta(once, theta), once, 1e-10)

    def test_first_root(self):
        theta = RootSubset(3, [1])
        for H in ([3, 1, -4], [2, -1, -1], [0.5, 0.25, -0.75]):
            t1 = float(H[0])
            self.assertVectorAlmostEqual(pi_theta(CartanVector(H), theta),
                                         [t1, -t1 / 2, -t1 / 2], 1e-12)

    def test_stacked(self):
        stack = np.array([[4, 1, -2, -3], [1, 0, 0, -1], [2, 2, -1, -3]], dtype=float)
        theta = RootSubset(4, [1, 3])
        projected = pi_theta(stack, theta)
        self.assertEqual(projected.shape, (3, 4))
        for row, expected in zip(projected, stack):
            self.assertVectorAlmostEqual(row, pi_theta(CartanVector(expected), theta), 1e-12)
