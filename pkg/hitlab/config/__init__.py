from .settings import Settings, get_settings, settings, use_settings

__all__ = ["Settings", "get_settings", "settings", "use_settings"]
