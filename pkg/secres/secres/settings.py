"""
Django settings for the secres project.

secres has no web surface and no database: the project is a set of Django
apps driven through management commands (see ``runs/management/commands``).

Every numerical tunable lives in the ``SECRES`` dict below and can be
overridden through the environment or a ``.env`` file read by decouple.
"""

from pathlib import Path

from decouple import config

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent


# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = config('SECRET_KEY', default='django-insecure-secres-local-runs-only')

DEBUG = config('DEBUG', default=False, cast=bool)

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    'series',
    'kepler',
    'normalform',
    'analysis',
    'propagation',
    'proximity',
    'nbody',
    'runs',
]


# No models anywhere in the project
DATABASES = {}


# Internationalization

LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_I18N = False

USE_TZ = True


# Catalog of two-planet systems

SECRES_CATALOG = config(
    'SECRES_CATALOG',
    default=str(BASE_DIR / 'kepler' / 'data' / 'catalog.txt'),
)


# Numerical tunables

SECRES = {
    # homological equations refuse |k.n| below this (rad/yr)
    'DIVISOR_FLOOR': config('SECRES_DIVISOR_FLOOR', default=1e-12, cast=float),
    # proximity thresholds
    'SECULAR_THRESHOLD': config('SECRES_SECULAR_THRESHOLD', default=2.6e-3, cast=float),
    'NEAR_MMR_THRESHOLD': config('SECRES_NEAR_MMR_THRESHOLD', default=2.6e-2, cast=float),
    # order-two pipeline warns above WARN and refuses above REFUSE
    'NEAR_IDENTITY_WARN': config('SECRES_NEAR_IDENTITY_WARN', default=2.6e-2, cast=float),
    'NEAR_IDENTITY_REFUSE': config('SECRES_NEAR_IDENTITY_REFUSE', default=0.26, cast=float),
    # expansion of 1/|r1 - r2| needs a1/a2 below this
    'ALPHA_MAX': config('SECRES_ALPHA_MAX', default=0.9, cast=float),
    'LIE_ORDER_CAP': config('SECRES_LIE_ORDER_CAP', default=30, cast=int),
    # Lie series stop once a term drops below LIE_TOLERANCE times the first
    'LIE_TOLERANCE': config('SECRES_LIE_TOLERANCE', default=1e-16, cast=float),
    # eccentricity giving the norm radius of an initially circular orbit
    'CIRCULAR_RADIUS_E': config('SECRES_CIRCULAR_RADIUS_E', default=1e-2, cast=float),
    'BIRKHOFF_ORDER': config('SECRES_BIRKHOFF_ORDER', default=10, cast=int),
    'SAMPLES': config('SECRES_SAMPLES', default=2048, cast=int),
    'RHO_SCALE': config('SECRES_RHO_SCALE', default=1.0, cast=float),
    'RESONANCE_KMAX': config('SECRES_RESONANCE_KMAX', default=12, cast=int),
    'RESONANCE_SIGMA': config('SECRES_RESONANCE_SIGMA', default=0.0, cast=float),
    # resonances of higher order fall back to DEFAULT_KF / DEFAULT_KS
    'KF_CAP': config('SECRES_KF_CAP', default=12, cast=int),
    'DEFAULT_KF': config('SECRES_DEFAULT_KF', default=6, cast=int),
    'DEFAULT_KS': config('SECRES_DEFAULT_KS', default=4, cast=int),
    # 0 keeps every nonzero coefficient
    'CLEANUP_TOL': config('SECRES_CLEANUP_TOL', default=0.0, cast=float),
    'BIRKHOFF_CLEANUP_TOL': config('SECRES_BIRKHOFF_CLEANUP_TOL', default=1e-14, cast=float),
    'CLOSE_ENCOUNTER_AU': config('SECRES_CLOSE_ENCOUNTER_AU', default=1e-3, cast=float),
    'STEPS_PER_INNER_PERIOD': config('SECRES_STEPS_PER_INNER_PERIOD', default=50, cast=int),
    'WORKERS': config('SECRES_WORKERS', default=1, cast=int),
    'RUN_ACCEPTANCE': config('SECRES_RUN_ACCEPTANCE', default=False, cast=bool),
}


# Logging

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'plain': {
            'format': '{asctime} {levelname} {name}: {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'plain',
        },
    },
    'loggers': {
        app: {
            'handlers': ['console'],
            'level': config('SECRES_LOG_LEVEL', default='INFO'),
            'propagate': False,
        }
        for app in INSTALLED_APPS
    },
}
