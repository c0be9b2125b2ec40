from django.conf import settings
from django.core.exceptions import ImproperlyConfigured


def numeric_default(name: str, fallback):
    """Get a numerical default from Django settings, or the fallback."""
    try:
        return getattr(settings, name, fallback)
    except ImproperlyConfigured:
        return fallback
