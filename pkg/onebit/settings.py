"""
Django settings for the onebit project.

Django only hosts the experiment commands (``manage.py noise_loss`` etc.);
there is no database, no URL configuration and no web server.
"""

import os
from pathlib import Path

from dotenv import load_dotenv

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent


load_dotenv()


SECRET_KEY = os.getenv("DJANGO_SECRET_KEY", "onebit-experiments-only")

DEBUG = os.getenv("DJANGO_DEBUG", "False").lower() in ['true', '1', 'yes']

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    'experiments',
]

DATABASES = {}


# Internationalization

LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_I18N = False

USE_TZ = True


# Experiments

EXPERIMENT_OUTPUT_DIR = Path(os.getenv("ONEBIT_OUTPUT_DIR", BASE_DIR / "results"))

SCENE_DIR = BASE_DIR / "scenes"

MC_DEFAULTS = {
    # unset: each experiment uses its own trial count
    "trials": int(os.environ["ONEBIT_TRIALS"]) if os.getenv("ONEBIT_TRIALS") else None,
    "block_size": int(os.getenv("ONEBIT_MC_BLOCK_SIZE", "512")),
    "workers": int(os.getenv("ONEBIT_WORKERS", "1")),
    "progress": os.getenv("ONEBIT_PROGRESS", "False").lower() in ['true', '1', 'yes'],
}

GREET_DEFAULTS = {
    "rho1": float(os.getenv("ONEBIT_RHO1", "2.0")),
    "rho2": float(os.getenv("ONEBIT_RHO2", "30.0")),
    "max_admm_iters": int(os.getenv("ONEBIT_ADMM_ITERS", "200")),
    "max_altopt_iters": int(os.getenv("ONEBIT_ALT_ITERS", "50")),
    "restarts": int(os.getenv("ONEBIT_RESTARTS", "1")),
}


LOG_LEVEL = os.getenv("ONEBIT_LOG_LEVEL", "INFO").upper()

LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "standard": {
            "format": "%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        },
    },
    "handlers": {
        "console": {
            "class": "logging.StreamHandler",
            "formatter": "standard",
        },
    },
    "root": {
        "handlers": ["console"],
        "level": LOG_LEVEL,
    },
}
