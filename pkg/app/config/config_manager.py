"""
Configuration manager for SmoothCert.

Handles loading and managing settings from a JSON file merged
over the schema defaults, with environment overrides read through
python-dotenv.
"""

import json
import logging
import os
from pathlib import Path
from typing import Dict, Any, Optional

from dotenv import load_dotenv

from .settings_schema import SettingsSchema
from ..errors import ConfigError

CONFIG_ENV_VAR = "SMOOTHCERT_CONFIG"

# environment variable -> (section, key, parser)
ENV_OVERRIDES = {
    "SMOOTHCERT_LOG_LEVEL": ("advanced", "log_level", str.lower),
    "SMOOTHCERT_SEED": ("advanced", "seed", int),
    "SMOOTHCERT_JOBS": ("advanced", "max_concurrent_workers", int),
}


class ConfigManager:
    """Validated settings for certification runs, stored as JSON."""

    def __init__(self, config_file: Optional[str] = None, use_env: bool = True):
        self._logger = logging.getLogger(f"{__name__}.{self.__class__.__name__}")
        if use_env:
            load_dotenv()
        self._settings: Dict[str, Any] = {}
        self._config_file = self._get_config_file_path(config_file)
        self._load_settings()
        if use_env:
            self._apply_env_overrides()

    def _get_config_file_path(self, config_file: Optional[str]) -> Path:
        """Resolve the settings file: explicit path, env variable, then home directory."""
        if config_file:
            return Path(config_file)
        env_path = os.environ.get(CONFIG_ENV_VAR)
        if env_path:
            return Path(env_path)
        return Path(os.path.expanduser("~/.smoothcert")) / "settings.json"

    def _load_settings(self) -> None:
        """Read the settings file over the defaults; a missing file means defaults."""
        default_settings = SettingsSchema.get_default_settings()
        if not self._config_file.exists():
            self._settings = default_settings
            return

        try:
            with open(self._config_file, 'r', encoding='utf-8') as f:
                loaded_settings = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"Cannot read settings file {self._config_file}: {e}") from e

        if not isinstance(loaded_settings, dict):
            raise ConfigError(f"Settings file {self._config_file} must hold a JSON object")

        self._settings = self._merge_settings(default_settings, loaded_settings)
        validation = SettingsSchema.validate_settings(self._settings)
        for warning in validation.warnings:
            self._logger.warning(warning)
        if not validation.is_valid:
            raise ConfigError(f"Invalid settings in {self._config_file}:\n{validation.error_message}")

    def _apply_env_overrides(self) -> None:
        for env_var, (section, key, parse) in ENV_OVERRIDES.items():
            raw = os.environ.get(env_var)
            if raw is None or raw == "":
                continue
            try:
                value = parse(raw)
            except ValueError as e:
                raise ConfigError(f"Invalid value for {env_var}: {raw!r}") from e
            updated = self.get_settings()
            updated[section] = dict(updated.get(section, {}), **{key: value})
            validation = SettingsSchema.validate_settings(updated)
            if not validation.is_valid:
                raise ConfigError(f"Invalid value for {env_var}:\n{validation.error_message}")
            self._settings[section] = updated[section]
            self._logger.debug("Setting %s.%s overridden from %s", section, key, env_var)

    def _merge_settings(self, defaults: Dict[str, Any], loaded: Dict[str, Any]) -> Dict[str, Any]:
        """Overlay loaded values on the defaults, section by section."""
        result = defaults.copy()

        for key, value in loaded.items():
            if key in result and isinstance(result[key], dict) and isinstance(value, dict):
                result[key] = self._merge_settings(result[key], value)
            else:
                result[key] = value

        return result

    def get_settings(self, section: Optional[str] = None) -> Dict[str, Any]:
        """Copy of one section, or of all sections when none is named."""
        if section:
            return dict(self._settings.get(section, {}))
        return {key: (dict(value) if isinstance(value, dict) else value)
                for key, value in self._settings.items()}
