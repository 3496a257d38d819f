"""Config module."""
from config.constants import *
from config.settings import Settings, get_settings, apply_overrides, reset_settings
