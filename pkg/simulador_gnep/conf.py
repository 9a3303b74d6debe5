from django.conf import settings
from django.core.exceptions import ImproperlyConfigured


def gnep_setting(nome):
    """
    Lê um parâmetro do dicionário settings.GNEP_FPM.

    Os valores padrão ficam todos em settings.py; aqui só há a checagem
    de que a chave existe.
    """
    config = getattr(settings, 'GNEP_FPM', None)
    if config is None or nome not in config:
        raise ImproperlyConfigured(f"GNEP_FPM['{nome}'] não está definido em settings.")
    return config[nome]
