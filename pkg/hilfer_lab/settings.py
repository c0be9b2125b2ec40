"""
Django settings for the hilfer_lab project.

Only management commands and the test runner are used; there is no database,
no middleware and no URL configuration.
"""

import os
from pathlib import Path

from dotenv import load_dotenv

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

# Load environment variables from .env file
env_path = BASE_DIR / ".env"
load_dotenv(dotenv_path=env_path)

SECRET_KEY = os.getenv("DJANGO_SECRET_KEY", "hilfer-lab-insecure-local-key")

DEBUG = os.getenv("DJANGO_DEBUG", "False").lower() == "true"

ALLOWED_HOSTS = []

INSTALLED_APPS = [
    "memory_control",
]

DATABASES = {}

USE_TZ = True

DEFAULT_AUTO_FIELD = "django.db.models.BigAutoField"

# Numerical defaults
MLF_TOLERANCE = 1e-12
CG_RELATIVE_TOLERANCE = 1e-10
CG_ITERATION_FACTOR = 10
EPS_PATH = [1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8]
DEFAULT_THREADS = 1
OUTPUT_DIR = BASE_DIR / "outputs"

LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "simple": {
            "format": "{levelname} {name}: {message}",
            "style": "{",
        },
    },
    "handlers": {
        "console": {
            "class": "logging.StreamHandler",
            "formatter": "simple",
        },
    },
    "root": {
        "handlers": ["console"],
        "level": "INFO",
    },
    "loggers": {
        "memory_control": {
            "handlers": ["console"],
            "level": os.getenv("HILFER_LOG_LEVEL", "INFO"),
            "propagate": False,
        },
    },
}
