"""
Configuration management system for SmoothCert.

This module provides settings storage, validation and environment
overrides shared by the command-line front end and the engine.
"""

from .config_manager import ConfigManager
from .settings_schema import SettingsSchema

__all__ = ['ConfigManager', 'SettingsSchema']
