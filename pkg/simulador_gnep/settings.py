"""
Django settings for simulador_gnep project.

O projeto não serve páginas nem usa banco de dados: o Django fornece a
configuração, o logging, os comandos de gerenciamento (CLI), a validação
de formulários e o motor de templates usado para gerar os SVG.

For the full list of settings and their values, see
https://docs.djangoproject.com/en/5.2/ref/settings/
"""

from pathlib import Path
import os

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = os.environ.get(
    'DJANGO_SECRET_KEY',
    'django-insecure-simulador-gnep-apenas-para-experimentos-locais',
)

DEBUG = os.environ.get('DJANGO_DEBUG', '0') == '1'

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    'geometry',
    'game',
    'fpm',
    'analysis',
    'harness',
]

MIDDLEWARE = []

TEMPLATES = [
    {
        'BACKEND': 'django.template.backends.django.DjangoTemplates',
        'DIRS': [],
        'APP_DIRS': True,
        'OPTIONS': {
            'context_processors': [],
        },
    },
]


# Database
# Persistência em banco está fora do escopo; os resultados vão para CSV/JSON/SVG.

DATABASES = {}


# Internationalization
# https://docs.djangoproject.com/en/5.2/topics/i18n/

LANGUAGE_CODE = "pt-br"

TIME_ZONE = 'America/Sao_Paulo'
USE_I18N = True
USE_TZ = True


# SIMULADOR GNEP (método de ponto viável online)
# -----------------------------------------------------------------------------
# Valores padrão de todos os parâmetros do motor e das análises.
# Flags da linha de comando e arquivos de configuração têm prioridade.

GNEP_FPM = {
    # semente usada quando nem a flag --seed nem o arquivo de config informam uma
    'SEED': int(os.environ.get('GNEP_FPM_SEED', '0')),
    # tolerância das auditorias de viabilidade: tol * (1 + |h_j|) por semiespaço
    'AUDIT_TOL': 1e-9,
    # 'sqrtT' (D/(G*sqrt(T))), 'theorem' (min(D/(G*sqrt(T)), delta/L)) ou 'fixed'
    'ETA_RULE': 'sqrtT',
    # 'euclidean' ou 'directional'
    'IOTA_MODE': 'euclidean',
    # amostras dos estimadores (delta, D_min, monotonicidade, G)
    'SAMPLES': 10**5,
    'G_INFLATION': 1.05,
    'DYKSTRA_TOL': 1e-10,
    'DYKSTRA_MAX_SWEEPS': 10**5,
    'SHRINK_FACTOR': 0.5,
    # abaixo de NEAR_POINT_RATIO * D o conjunto desejado não encolhe mais
    'NEAR_POINT_RATIO': 1e-12,
    # exemplo "example_sb2": P = escala * I e epsilon da restrição acoplada
    'SADDLE_P_SCALE': 0.5,
    'SADDLE_EPS': 1e-2,
    'KKT_TOL': 1e-10,
    # threads usadas pelo comando compare
    'WORKERS': int(os.environ.get('GNEP_FPM_WORKERS', '2')),
}


# LOGGING
# -----------------------------------------------------------------------------

GNEP_FPM_LOG_LEVEL = os.environ.get('GNEP_FPM_LOG_LEVEL', 'WARNING')

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{levelname} {asctime} {name} {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'verbose',
        },
    },
    'root': {
        'handlers': ['console'],
        'level': 'WARNING',
    },
    'loggers': {
        app: {
            'handlers': ['console'],
            'level': GNEP_FPM_LOG_LEVEL,
            'propagate': False,
        }
        for app in ('geometry', 'game', 'fpm', 'analysis', 'harness')
    },
}
