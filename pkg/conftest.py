import os

import django

os.environ.setdefault("DJANGO_SETTINGS_MODULE", "onebit.settings")
django.setup()
