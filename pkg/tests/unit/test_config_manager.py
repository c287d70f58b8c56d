"""
Unit tests for configuration manager functionality.

Tests the ConfigManager class for default handling, merging,
environment overrides and error reporting.
"""

import json

import pytest

from app.config.config_manager import ConfigManager
from app.errors import ConfigError


@pytest.mark.unit
class TestConfigManager:
    """Test suite for ConfigManager core functionality."""

    def test_defaults_when_file_missing(self, config_path):
        """Test ConfigManager falls back to defaults without a settings file."""
        config_manager = ConfigManager(str(config_path), use_env=False)

        settings = config_manager.get_settings()
        assert settings['certification']['sigma'] == 0.25
        assert settings['grid']['t_count'] == 50
        assert settings['advanced']['block_size'] == 4096
        assert not config_path.exists()

    def test_load_existing_configuration(self, sample_config_file):
        """Test loading an existing configuration file."""
        config_manager = ConfigManager(str(sample_config_file), use_env=False)

        assert config_manager.get_settings('certification')['method'] == 'hoeffding'
        assert config_manager.get_settings('grid')['maps'] == ['hardmax', 'sparsemax']
        assert config_manager.get_settings('advanced')['seed'] == 42

    def test_partial_file_merged_with_defaults(self, config_path):
        """Test keys missing from the file keep their defaults."""
        config_path.write_text(json.dumps({'certification': {'sigma': 1.0}}), encoding='utf-8')

        config_manager = ConfigManager(str(config_path), use_env=False)

        certification = config_manager.get_settings('certification')
        assert certification['sigma'] == 1.0
        assert certification['alpha'] == 1e-3
        assert config_manager.get_settings('grid')['t_scale'] == 'log'

    def test_config_path_from_environment(self, config_path, sample_settings, monkeypatch):
        """Test SMOOTHCERT_CONFIG selects the settings file."""
        config_path.write_text(json.dumps(sample_settings), encoding='utf-8')
        monkeypatch.setenv('SMOOTHCERT_CONFIG', str(config_path))

        config_manager = ConfigManager(use_env=False)

        assert config_manager.get_settings('advanced')['seed'] == 42

    def test_get_settings_returns_copies(self, config_path):
        """Test callers cannot mutate the stored settings."""
        config_manager = ConfigManager(str(config_path), use_env=False)

        section = config_manager.get_settings('certification')
        section['sigma'] = 99.0

        assert config_manager.get_settings('certification')['sigma'] == 0.25


@pytest.mark.unit
class TestEnvironmentOverrides:
    """Test SMOOTHCERT_* variables overriding file settings."""

    def test_overrides_applied(self, sample_config_file, monkeypatch):
        monkeypatch.setenv('SMOOTHCERT_SEED', '123')
        monkeypatch.setenv('SMOOTHCERT_JOBS', '4')
        monkeypatch.setenv('SMOOTHCERT_LOG_LEVEL', 'DEBUG')

        config_manager = ConfigManager(str(sample_config_file))

        advanced = config_manager.get_settings('advanced')
        assert advanced['seed'] == 123
        assert advanced['max_concurrent_workers'] == 4
        assert advanced['log_level'] == 'debug'

    def test_override_keeps_rest_of_section(self, sample_config_file, monkeypatch):
        monkeypatch.setenv('SMOOTHCERT_SEED', '7')

        advanced = ConfigManager(str(sample_config_file)).get_settings('advanced')

        assert advanced['seed'] == 7
        assert advanced['log_level'] == 'info'
        assert advanced['block_size'] == 4096

    def test_overrides_not_saved(self, sample_config_file, monkeypatch):
        monkeypatch.setenv('SMOOTHCERT_SEED', '123')

        ConfigManager(str(sample_config_file))

        saved = json.loads(sample_config_file.read_text(encoding='utf-8'))
        assert saved['advanced']['seed'] == 42

    def test_ignored_when_disabled(self, sample_config_file, monkeypatch):
        monkeypatch.setenv('SMOOTHCERT_SEED', '123')

        config_manager = ConfigManager(str(sample_config_file), use_env=False)

        assert config_manager.get_settings('advanced')['seed'] == 42

    @pytest.mark.parametrize('name,value', [
        ('SMOOTHCERT_SEED', 'abc'),
        ('SMOOTHCERT_SEED', '-1'),
        ('SMOOTHCERT_JOBS', '0'),
        ('SMOOTHCERT_LOG_LEVEL', 'verbose'),
    ])
    def test_invalid_override_raises(self, config_path, monkeypatch, name, value):
        monkeypatch.setenv(name, value)

        with pytest.raises(ConfigError):
            ConfigManager(str(config_path))


@pytest.mark.unit
class TestConfigErrors:
    """Test unreadable and invalid settings files."""

    def test_malformed_json(self, config_path):
        config_path.write_text('{"certification": ', encoding='utf-8')

        with pytest.raises(ConfigError, match='Cannot read settings file'):
            ConfigManager(str(config_path), use_env=False)

    def test_non_object_json(self, config_path):
        config_path.write_text('[1, 2, 3]', encoding='utf-8')

        with pytest.raises(ConfigError):
            ConfigManager(str(config_path), use_env=False)

    def test_invalid_values(self, config_path):
        config_path.write_text(json.dumps({'grid': {'t_lower': 5.0, 't_upper': 1.0}}), encoding='utf-8')

        with pytest.raises(ConfigError, match='t_lower'):
            ConfigManager(str(config_path), use_env=False)

    def test_exit_code(self, config_path):
        config_path.write_text('not json', encoding='utf-8')

        with pytest.raises(ConfigError) as excinfo:
            ConfigManager(str(config_path), use_env=False)
        assert excinfo.value.exit_code == 2
