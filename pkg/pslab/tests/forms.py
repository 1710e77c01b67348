from django.core.exceptions import NON_FIELD_ERRORS
import numpy as np
from pslab.cartan import Functional, RootSubset
from pslab.convexity import hilbert_functional, phi_bar_p
from pslab.forms import RANDOMIZED, ExperimentConfig, parse_functional
from pslab.orbit import COUNT_REGRESSION, HASH_DEDUP
from pslab.settings import pslab_settings
from pslab.test_utils.testcase import PslabTestCase


class ParseFunctionalTests(PslabTestCase):
    def test_names(self):
        self.assertEqual(parse_functional('hilbert', 3), hilbert_functional(3))
        self.assertEqual(parse_functional('omega:2', 4), Functional.weight(4, 2))
        self.assertEqual(parse_functional('alpha:1', 3), Functional.root(3, 1))
        self.assertEqual(parse_functional('phi_bar_p:2', 5), phi_bar_p(5, 2))

    def test_coefficients(self):
        self.assertEqual(parse_functional([1, 0.5], 3), Functional([1, 0.5]))
        with self.assertRaises(ValueError):
            parse_functional([1, 0.5], 4)

    def test_invalid(self):
        for spec in ('foo', 'omega', 'omega:x', 'hilbert:1'):
            with self.assertRaises(ValueError):
                parse_functional(spec, 3)
        for spec in ('omega:3', 'phi_p:2'):
            with self.assertRaises(IndexError):
                parse_functional(spec, 3)


class ExperimentConfigTests(PslabTestCase):
    def test_fixture(self):
        form = ExperimentConfig({'fixture': 'F2', 'theta': [1]}, subcommand='kappa')
        self.assertTrue(form.is_valid(), form.errors)
        data = form.cleaned_data
        self.assertEqual(data['group'].dim, 3)
        self.assertEqual(data['theta'], RootSubset(3, [1]))
        self.assertEqual(data['big_theta'], RootSubset.full(3))
        self.assertEqual(data['functionals'], [hilbert_functional(3)])
        self.assertEqual(data['max_len'], 8)
        self.assertEqual(data['method'], COUNT_REGRESSION)
        self.assertEqual(data['epsilons'], list(pslab_settings.EPSILON_SCHEDULE))
        self.assertEqual(data['hilbert_len'], 8)

    def test_generators(self):
        form = ExperimentConfig({'generators': {'a': [[2, 0], [0, 0.5]]}, 'policy': HASH_DEDUP,
                                 'max_len': 3}, subcommand='kappa')
        self.assertTrue(form.is_valid(), form.errors)
        group = form.cleaned_data['group']
        self.assertEqual(group.labels, ['a'])
        self.assertEqual(group.policy, HASH_DEDUP)
        description = form.describe()
        self.assertEqual(description['generators'], {'a': [[2.0, 0.0], [0.0, 0.5]]})
        self.assertEqual(description['dim'], 2)
        self.assertEqual(description['theta'], [1])

    def test_group_required(self):
        for data in ({}, {'fixture': 'F1', 'generators': {'a': np.eye(3).tolist()}}):
            form = ExperimentConfig(data, subcommand='kappa')
            self.assertFalse(form.is_valid())
            self.assertTrue(form.has_error(NON_FIELD_ERRORS, 'group'))

    def test_invalid_generators(self):
        form = ExperimentConfig({'generators': {'a': [[2, 0], [0, 2]]}}, subcommand='kappa')
        self.assertFalse(form.is_valid())
        self.assertTrue(form.has_error(NON_FIELD_ERRORS, 'group'))
        form = ExperimentConfig({'generators': [[1, 0], [0, 1]]}, subcommand='kappa')
        self.assertFalse(form.is_valid())
        self.assertTrue(form.has_error('generators', 'invalid'))

    def test_seed(self):
        for name in sorted(RANDOMIZED):
            form = ExperimentConfig({'fixture': 'F1'}, subcommand=name)
            self.assertFalse(form.is_valid())
            self.assertTrue(form.has_error('seed', 'required'))
            self.assertTrue(ExperimentConfig({'fixture': 'F1', 'seed': 7},
                                             subcommand=name).is_valid())
        self.assertTrue(ExperimentConfig({'fixture': 'F1'}, subcommand='exponent').is_valid())

    def test_bounds(self):
        for data in ({'max_len': 0}, {'max_len': 41}, {'seed': -1}, {'hilbert_len': 13}):
            data['fixture'] = 'F1'
            form = ExperimentConfig(data, subcommand='kappa')
            self.assertFalse(form.is_valid())
            self.assertEqual(len(form.errors), 1)

    def test_lengths(self):
        for max_len, expected in ((5, 5), (20, 12)):
            form = ExperimentConfig({'fixture': 'F2', 'max_len': max_len, 'seed': 1},
                                    subcommand='hilbert')
            self.assertTrue(form.is_valid(), form.errors)
            self.assertEqual(form.cleaned_data['hilbert_len'], expected)
        form = ExperimentConfig({'fixture': 'F2', 'max_len': 20, 'hilbert_len': 4, 'seed': 1},
                                subcommand='hilbert')
        self.assertTrue(form.is_valid(), form.errors)
        self.assertEqual(form.cleaned_data['hilbert_len'], 4)

        form = ExperimentConfig({'fixture': 'F1', 'max_len': 3, 'seed': 1}, subcommand='selftest')
        self.assertFalse(form.is_valid())
        self.assertTrue(form.has_error('max_len', 'min_value'))
        form = ExperimentConfig({'fixture': 'F1', 'max_len': 3}, subcommand='kappa')
        self.assertTrue(form.is_valid(), form.errors)

    def test_lists(self):
        invalid = {
            'theta': [3],
            'radii': [1.0, -2.0],
            'epsilons': [0],
            'coefficients': [0.5],
            'functionals': ['omega:7'],
            'lambda_lengths': [1.5],
        }
        for name, value in invalid.items():
            form = ExperimentConfig({'fixture': 'F1', name: value}, subcommand='kappa')
            self.assertFalse(form.is_valid())
            self.assertTrue(form.has_error(name), name)

    def test_functionals(self):
        form = ExperimentConfig({'fixture': 'F3', 'functionals': ['omega:1', [0.5, 0.5]]},
                                subcommand='exponent')
        self.assertTrue(form.is_valid(), form.errors)
        self.assertEqual(form.cleaned_data['functionals'],
                         [Functional.weight(3, 1), Functional([0.5, 0.5])])
        self.assertEqual(form.describe()['functionals'], [[1.0, 0.0], [0.5, 0.5]])
