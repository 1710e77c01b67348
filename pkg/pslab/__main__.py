""" Standalone entry point: python -m pslab <subcommand> [options]
    Configures a minimal Django project when none is set up.
"""
from django.conf import settings
import sys

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'plain': {'format': '%(levelname)s %(name)s: %(message)s'},
    },
    'handlers': {
        'console': {'class': 'logging.StreamHandler', 'formatter': 'plain'},
    },
    'loggers': {
        'pslab': {'handlers': ['console'], 'level': 'WARNING', 'propagate': False},
    },
}

def main(argv=None):
    argv = list(sys.argv if argv is None else argv)
    if not settings.configured:
        settings.configure(
            INSTALLED_APPS=['pslab.apps.PslabConfig'],
            LOGGING=LOGGING,
            PSLAB={},
        )
    from django.core.management import execute_from_command_line
    execute_from_command_line([argv[0], 'pslab'] + argv[1:])

if __name__ == '__main__':
    main()
