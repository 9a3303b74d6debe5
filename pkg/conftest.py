import os

import django

os.environ.setdefault("DJANGO_SETTINGS_MODULE", "simulador_gnep.settings")
django.setup()
