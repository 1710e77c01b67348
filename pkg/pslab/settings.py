""" Pslab-specific settings
    Tolerances and estimator constants shared by every module. Reports embed
    the full set, so a run can be reproduced from its header alone.

    Settings respond to setting_changed event.
"""
from django.conf import settings as djsettings
from django.core import checks
from django.test.signals import setting_changed
from django.utils.functional import SimpleLazyObject, empty
from collections import namedtuple
import numbers

__all__ = ('pslab_settings', )

#===============================================================================

_default_settings = {
    'NORM': 'sup',
    'SUM_TOLERANCE': 1e-9,
    'IDENTITY_TOLERANCE': 1e-8,
    'COMPOUND_TOLERANCE': 1e-6,
    'DETERMINANT_TOLERANCE': 1e-8,
    'GAP_FLOOR': 1e-6,
    'TRANSVERSALITY_FLOOR': 1e-10,
    'FLAG_TOLERANCE': 1e-7,
    'DEDUP_DECIMALS': 6,
    'DISCRETENESS_COLLAPSE': 0.01,
    'REGRESSION_WINDOW': (0.4, 0.9),
    'MIN_WINDOW_POINTS': 8,
    'ESTIMATOR_NOISE': {'scaling': 0.02, 'agreement': 0.05},
    'EPSILON_SCHEDULE': (0.1, 0.05, 0.02),
    'CONVERGENCE_INCREMENT': 1e-6,
    'CONVERGENCE_GAP': 5.0,
    'HILBERT_DPS': 60,
    'DOMAIN_MARGIN': 1e-9,
    'LAMBDA_STEP': 0.1,
}

_tolerance_keys = (
    'SUM_TOLERANCE', 'IDENTITY_TOLERANCE', 'COMPOUND_TOLERANCE', 'DETERMINANT_TOLERANCE',
    'GAP_FLOOR', 'TRANSVERSALITY_FLOOR', 'FLAG_TOLERANCE', 'DISCRETENESS_COLLAPSE',
    'CONVERGENCE_INCREMENT', 'DOMAIN_MARGIN', 'LAMBDA_STEP',
)

#===============================================================================

class PslabSettingsChecks:
    @staticmethod
    def check_NORM(value):
        errors = []
        if value != 'sup':
            errors.append(checks.Error('PSLAB["NORM"] must be "sup", the only norm on the '
                                       'Cartan subspace reports are computed with',
                                       obj='NORM', id='pslab.settings.E02'))
        return errors

    @staticmethod
    def _check_tolerance(key, value):
        errors = []
        if not isinstance(value, numbers.Real) or isinstance(value, bool) or not value > 0:
            errors.append(checks.Error('PSLAB["%s"] must be a positive number' % key,
                                       obj=key, id='pslab.settings.E03'))
        return errors

    @staticmethod
    def check_DEDUP_DECIMALS(value):
        errors = []
        if not isinstance(value, int) or isinstance(value, bool) or not 0 < value <= 15:
            errors.append(checks.Error('PSLAB["DEDUP_DECIMALS"] must be an integer '
                                       'between 1 and 15',
                                       obj='DEDUP_DECIMALS', id='pslab.settings.E04'))
        return errors

    @staticmethod
    def check_REGRESSION_WINDOW(value):
        errors = []
        if (not isinstance(value, (tuple, list)) or len(value) != 2 or
            not all(isinstance(item, numbers.Real) for item in value) or
            not 0 <= value[0] < value[1] <= 1):
            errors.append(checks.Error('PSLAB["REGRESSION_WINDOW"] must be a pair (low, high) '
                                       'of fractions with 0 <= low < high <= 1',
                                       obj='REGRESSION_WINDOW', id='pslab.settings.E05'))
        return errors

    @staticmethod
    def check_MIN_WINDOW_POINTS(value):
        errors = []
        if not isinstance(value, int) or isinstance(value, bool) or value < 2:
            errors.append(checks.Error('PSLAB["MIN_WINDOW_POINTS"] must be an integer >= 2',
                                       obj='MIN_WINDOW_POINTS', id='pslab.settings.E06'))
        return errors

    @staticmethod
    def check_ESTIMATOR_NOISE(value):
        errors = []
        if (not isinstance(value, dict) or set(value) != {'scaling', 'agreement'} or
            not all(isinstance(item, numbers.Real) and item > 0 for item in value.values())):
            errors.append(checks.Error('PSLAB["ESTIMATOR_NOISE"] must map "scaling" and '
                                       '"agreement" to positive numbers',
                                       obj='ESTIMATOR_NOISE', id='pslab.settings.E07'))
        return errors

    @staticmethod
    def check_EPSILON_SCHEDULE(value):
        errors = []
        if (not isinstance(value, (tuple, list)) or not value or
            not all(isinstance(item, numbers.Real) and item > 0 for item in value)):
            errors.append(checks.Error('PSLAB["EPSILON_SCHEDULE"] must be a non-empty '
                                       'sequence of positive numbers',
                                       obj='EPSILON_SCHEDULE', id='pslab.settings.E08'))
        return errors

    @staticmethod
    def check_CONVERGENCE_GAP(value):
        return PslabSettingsChecks._check_tolerance('CONVERGENCE_GAP', value)

    @staticmethod
    def check_HILBERT_DPS(value):
        errors = []
        if not isinstance(value, int) or isinstance(value, bool) or value < 30:
            errors.append(checks.Warning('PSLAB["HILBERT_DPS"] should be an integer >= 30, '
                                         'orbit points closer to the boundary are lost',
                                         obj='HILBERT_DPS', id='pslab.settings.W02'))
        return errors

for _key in _tolerance_keys:
    setattr(PslabSettingsChecks, 'check_%s' % _key,
            staticmethod(lambda value, _key=_key: PslabSettingsChecks._check_tolerance(_key, value)))


@checks.register()
def check(app_configs, **kwargs):
    """ Check pslab settings """
    errors = []

    # Check for pslab settings in global namespace
    for key in dir(djsettings):
        if key.startswith('PSLAB_'):
            errors.append(checks.Critical('PSLAB setting in global namespace',
                hint='PSLAB settings are namespaced in the PSLAB dict.',
                obj=key,
                id='pslab.settings.C01',
            ))

    pslab_settings = getattr(djsettings, 'PSLAB', {})
    for key, value in pslab_settings.items():
        try:
            checker = getattr(PslabSettingsChecks, 'check_%s' % key)
        except AttributeError:
            errors.append(checks.Warning('Unknown setting PSLAB[%r]' % key, obj=key,
                                         id='pslab.settings.W01'))
        else:
            errors.extend(checker(value))
    return errors

#===============================================================================

def _build():
    """ Build pslab settings from django settings """
    user_settings = getattr(djsettings, 'PSLAB', {}) if djsettings.configured else {}
    pslab_settings = _default_settings.copy()
    pslab_settings.update(user_settings)

    # Ensure settings are frozen
    pslab_settings['REGRESSION_WINDOW'] = tuple(pslab_settings['REGRESSION_WINDOW'])
    pslab_settings['EPSILON_SCHEDULE'] = tuple(pslab_settings['EPSILON_SCHEDULE'])
    pslab_settings['ESTIMATOR_NOISE'] = dict(pslab_settings['ESTIMATOR_NOISE'])
    return namedtuple('PslabSettings', pslab_settings.keys())(*pslab_settings.values())

pslab_settings = SimpleLazyObject(_build)

def settings_snapshot():
    """ Plain dict of current settings, as embedded in report headers """
    snapshot = pslab_settings._asdict()
    snapshot['REGRESSION_WINDOW'] = list(snapshot['REGRESSION_WINDOW'])
    snapshot['EPSILON_SCHEDULE'] = list(snapshot['EPSILON_SCHEDULE'])
    return snapshot

#===============================================================================

def invalidate_settings(**kwargs):
    """ Empty pslab_settings so next lookup rebuilds them from django settings """
    pslab_settings._wrapped = empty
setting_changed.connect(invalidate_settings)
