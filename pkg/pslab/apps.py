from django.apps import AppConfig


class PslabConfig(AppConfig):
    name = 'pslab'
    verbose_name = 'pslab'

    def ready(self):
        # registers the PSLAB settings checks
        import pslab.settings
