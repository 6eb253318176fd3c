from django.apps import AppConfig


class NormalformConfig(AppConfig):
    name = 'normalform'
