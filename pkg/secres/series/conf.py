from django.conf import settings


def tunable(name):
    """Return a numerical tunable from ``settings.SECRES``."""
    return settings.SECRES[name]
