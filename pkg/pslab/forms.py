""" Validation of experiment configurations, as read from a JSON config file
    and overridden from the command line.
    Part of pslab public API.
"""
from django import forms
from django.core.exceptions import ValidationError
import numpy as np
from pslab.cartan import Functional, RootSubset
from pslab.convexity import hilbert_functional, phi_bar_p, phi_p
from pslab.fixtures import FIXTURES, load_fixture
from pslab.orbit import COUNT_REGRESSION, FREE_REDUCED, HASH_DEDUP, SERIES_ROOT, GeneratorSet
from pslab.settings import pslab_settings

__all__ = (
    'ExperimentConfig',
    'parse_functional',
    'RANDOMIZED',
)

# Subcommands drawing random samples, which need a seed
RANDOMIZED = frozenset(('track', 'bms', 'hilbert', 'selftest'))

#=============================================================================

def parse_functional(spec, dim):
    """ A functional from its config form: a list of weight coefficients, or
        one of 'hilbert', 'omega:j', 'alpha:j', 'phi_p:p', 'phi_bar_p:p'.
    """
    if isinstance(spec, (list, tuple)):
        if len(spec) != dim - 1:
            raise ValueError('Expected %d weight coefficients, got %d' % (dim - 1, len(spec)))
        return Functional(spec)
    name, _, index = str(spec).partition(':')
    if name == 'hilbert' and not index:
        return hilbert_functional(dim)
    builders = {
        'omega': lambda j: Functional.weight(dim, j),
        'alpha': lambda j: Functional.root(dim, j),
        'phi_p': lambda p: phi_p(dim, p),
        'phi_bar_p': lambda p: phi_bar_p(dim, p),
    }
    if name not in builders or not index.isdigit():
        raise ValueError('Unknown functional %r' % spec)
    return builders[name](int(index))


class ExperimentConfig(forms.Form):
    """ Schema of an experiment. The group is either a named fixture or
        explicit generator matrices; the validated GeneratorSet, subsets and
        functionals are available in cleaned_data after is_valid().
    """
    fixture = forms.ChoiceField(choices=[(name, name) for name in sorted(FIXTURES)],
                                required=False)
    generators = forms.JSONField(required=False)
    policy = forms.ChoiceField(choices=[(FREE_REDUCED, FREE_REDUCED), (HASH_DEDUP, HASH_DEDUP)],
                               required=False)
    theta = forms.JSONField(required=False)
    big_theta = forms.JSONField(required=False)
    functionals = forms.JSONField(required=False)
    coefficients = forms.JSONField(required=False)
    method = forms.ChoiceField(choices=[(COUNT_REGRESSION, COUNT_REGRESSION),
                                        (SERIES_ROOT, SERIES_ROOT)], required=False)
    max_len = forms.IntegerField(min_value=1, max_value=40, required=False)
    radii = forms.JSONField(required=False)
    epsilons = forms.JSONField(required=False)
    samples = forms.IntegerField(min_value=1, required=False)
    track_length = forms.IntegerField(min_value=2, required=False)
    hilbert_len = forms.IntegerField(min_value=1, max_value=12, required=False)
    lambda_lengths = forms.JSONField(required=False)
    seed = forms.IntegerField(min_value=0, max_value=2 ** 64 - 1, required=False)

    defaults = {
        'policy': None,
        'method': COUNT_REGRESSION,
        'max_len': 8,
        'functionals': ['hilbert'],
        'coefficients': [0.5, 0.5],
        'radii': [4.0],
        'samples': 20,
        'track_length': 20,
        'lambda_lengths': [10, 40],
    }

    def __init__(self, *args, **kwargs):
        self.subcommand = kwargs.pop('subcommand', None)
        super(ExperimentConfig, self).__init__(*args, **kwargs)

    def clean_generators(self):
        generators = self.cleaned_data.get('generators')
        if generators in (None, {}):
            return None
        if not isinstance(generators, dict):
            raise ValidationError('Generators must map single-letter labels to matrices',
                                  code='invalid')
        try:
            matrices = dict((label, np.array(matrix, dtype=float))
                            for label, matrix in generators.items())
        except (TypeError, ValueError):
            raise ValidationError('Generator matrices must be nested lists of numbers',
                                  code='invalid')
        return matrices

    def _clean_list(self, name, kind):
        value = self.cleaned_data.get(name)
        if value is None:
            return None
        if not isinstance(value, list) or not all(isinstance(item, kind) and
                                                  not isinstance(item, bool) for item in value):
            raise ValidationError('%s must be a list' % name, code='invalid')
        return value

    def clean_theta(self):
        return self._clean_list('theta', int)

    def clean_big_theta(self):
        return self._clean_list('big_theta', int)

    def clean_radii(self):
        radii = self._clean_list('radii', (int, float))
        if radii and min(radii) <= 0:
            raise ValidationError('Shadow radii must be positive', code='invalid')
        return radii

    def clean_epsilons(self):
        epsilons = self._clean_list('epsilons', (int, float))
        if epsilons and min(epsilons) <= 0:
            raise ValidationError('Epsilon schedule must be positive', code='invalid')
        return epsilons

    def clean_coefficients(self):
        coefficients = self._clean_list('coefficients', (int, float))
        if coefficients is not None and len(coefficients) != 2:
            raise ValidationError('Two coefficients c1, c2 are expected', code='invalid')
        return coefficients

    def clean_lambda_lengths(self):
        return self._clean_list('lambda_lengths', int)

    def clean(self):
        cleaned_data = super(ExperimentConfig, self).clean()
        for key, value in self.defaults.items():
            if cleaned_data.get(key) in (None, ''):
                cleaned_data[key] = value
        if cleaned_data.get('epsilons') is None:
            cleaned_data['epsilons'] = list(pslab_settings.EPSILON_SCHEDULE)
        if cleaned_data.get('hilbert_len') is None:
            cleaned_data['hilbert_len'] = min(cleaned_data['max_len'],
                                              self.fields['hilbert_len'].max_value)
        if self.subcommand == 'selftest' and cleaned_data['max_len'] < 4:
            self.add_error('max_len', ValidationError('The self test compares shadows two lengths '
                                                      'apart, max_len must be at least 4',
                                                      code='min_value'))

        if self.subcommand in RANDOMIZED and cleaned_data.get('seed') is None:
            self.add_error('seed', ValidationError('Subcommand %(name)s is randomized, a seed '
                                                   'is required', code='required',
                                                   params={'name': self.subcommand}))

        fixture, generators = cleaned_data.get('fixture'), cleaned_data.get('generators')
        if bool(fixture) == bool(generators):
            if not self.has_error('generators'):
                raise ValidationError('Give exactly one of fixture and generators',
                                      code='group')
            return cleaned_data
        try:
            if fixture:
                group = load_fixture(fixture, cleaned_data['policy'])
            else:
                group = GeneratorSet(sorted(generators.items()),
                                     cleaned_data['policy'] or FREE_REDUCED)
        except (ValueError, np.linalg.LinAlgError) as exc:
            raise ValidationError(str(exc), code='group')
        cleaned_data['group'] = group
        dim = group.dim

        for name in ('theta', 'big_theta'):
            indices = cleaned_data.get(name)
            try:
                cleaned_data[name] = (RootSubset.full(dim) if not indices
                                      else RootSubset(dim, indices))
            except (IndexError, ValueError) as exc:
                self.add_error(name, ValidationError(str(exc), code='invalid'))

        functionals = cleaned_data['functionals']
        if not isinstance(functionals, list) or not functionals:
            self.add_error('functionals', ValidationError('functionals must be a non-empty list',
                                                          code='invalid'))
        else:
            try:
                cleaned_data['functionals'] = [parse_functional(spec, dim)
                                               for spec in functionals]
            except (IndexError, ValueError) as exc:
                self.add_error('functionals', ValidationError(str(exc), code='invalid'))
        return cleaned_data

    def describe(self):
        """ The JSON-ready form of the validated config, hashed into report headers """
        data = self.cleaned_data
        result = {}
        for name in self.fields:
            value = data.get(name)
            if name == 'generators':
                value = None if value is None else dict((label, matrix.tolist())
                                                        for label, matrix in value.items())
            elif name == 'functionals':
                value = [functional.tolist() for functional in value]
            elif name in ('theta', 'big_theta'):
                value = value.tolist()
            result[name] = value
        result['dim'] = data['group'].dim
        return result
