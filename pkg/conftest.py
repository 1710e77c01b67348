# Configure Django the same way runtests.py does, so pytest can collect
# the pslab.tests modules.
import django
from django.conf import settings

from runtests import CONFIGURATION


def pytest_configure(config):
    if not settings.configured:
        settings.configure(**CONFIGURATION)
        django.setup()
