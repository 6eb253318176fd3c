from django.apps import AppConfig


class ProximityConfig(AppConfig):
    name = 'proximity'
