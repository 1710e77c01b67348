#!/usr/bin/env python
# -*- coding: utf-8 -*-
import django
from django.conf import settings
from django.core import checks
from django.test.utils import get_runner
from django.utils.encoding import force_str
import argparse
import sys


#=============================================================================

CONFIGURATION = {
    'DEBUG': True,
    'SECRET_KEY': 'dummy',
    'DATABASES': {
        'default': {'ENGINE': 'django.db.backends.sqlite3', 'NAME': ':memory:'},
    },
    'INSTALLED_APPS': (
        'pslab.apps.PslabConfig',
    ),
    'LOGGING': {
        'version': 1,
        'disable_existing_loggers': False,
        'formatters': {
            'plain': {'format': '%(levelname)s %(name)s: %(message)s'},
        },
        'handlers': {
            'console': {'class': 'logging.StreamHandler', 'formatter': 'plain'},
        },
        'loggers': {
            # some tests make experiments fail on purpose
            'pslab': {'handlers': ['console'], 'level': 'CRITICAL', 'propagate': False},
        },
    },
    'PSLAB': {},
}

#=============================================================================

def main(failfast=False, verbosity=1, test_labels=None):
    test_labels = ['pslab.tests.%s' % label for label in test_labels] if test_labels else ['pslab']

    settings.configure(**CONFIGURATION)
    django.setup()

    errors = checks.run_checks()
    if errors:
        print('\n'.join(force_str(error) for error in errors))
        return 1

    TestRunner = get_runner(settings)
    test_runner = TestRunner(
        pattern='*.py',
        verbosity=int(verbosity),
        interactive=False,
        failfast=failfast
    )
    failures = test_runner.run_tests(test_labels)
    return 0 if failures == 0 else 2

if __name__ == '__main__':
    parser = argparse.ArgumentParser()
    parser.add_argument('--failfast', action='store_true')
    parser.add_argument('--verbosity', default=1)
    parser.add_argument('test_labels', nargs='*')
    args = parser.parse_args()

    sys.exit(main(**vars(args)))
