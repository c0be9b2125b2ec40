from django.apps import AppConfig


class MemoryControlConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "memory_control"
    verbose_name = "Hilfer memory control"
