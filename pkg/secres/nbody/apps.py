from django.apps import AppConfig


class NbodyConfig(AppConfig):
    name = 'nbody'
    verbose_name = 'N-body validator'
