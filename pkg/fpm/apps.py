from django.apps import AppConfig


class FpmConfig(AppConfig):
    name = 'fpm'
    verbose_name = 'Método de ponto viável online'
