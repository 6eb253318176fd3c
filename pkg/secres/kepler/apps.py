from django.apps import AppConfig


class KeplerConfig(AppConfig):
    name = 'kepler'
    verbose_name = 'Keplerian expansion of the planetary Hamiltonian'
