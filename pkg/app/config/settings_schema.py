"""
Settings schema and validation for SmoothCert.

Defines the structure, defaults and validation rules for certification,
grid and advanced settings.
"""

from dataclasses import dataclass
from typing import Dict, List, Any
from enum import Enum


class LogLevel(Enum):
    """Logging levels for the application."""
    DEBUG = "debug"
    INFO = "info"
    WARNING = "warning"
    ERROR = "error"


class TemperatureScale(Enum):
    """Spacing of the temperature grid."""
    LOG = "log"
    LINEAR = "linear"


VALID_MAPS = ("hardmax", "softmax", "sparsemax")
VALID_METHODS = ("bernstein", "hoeffding", "clopper-pearson", "clopper_pearson")
VALID_RISK_SPLITS = ("paper-literal", "per-class", "bonferroni")
VALID_RULES = ("R1", "R2", "R3")


@dataclass
class ValidationResult:
    """Result of settings validation."""
    is_valid: bool
    errors: List[str]
    warnings: List[str]

    def __post_init__(self):
        if not self.errors:
            self.errors = []
        if not self.warnings:
            self.warnings = []

    @property
    def error_message(self) -> str:
        """Get formatted error message."""
        messages = []
        if self.errors:
            messages.extend([f"Error: {error}" for error in self.errors])
        if self.warnings:
            messages.extend([f"Warning: {warning}" for warning in self.warnings])
        return "\n".join(messages)


def _is_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


class SettingsSchema:
    """Schema definition and validation for application settings."""

    @staticmethod
    def get_default_settings() -> Dict[str, Any]:
        """Get default settings structure."""
        return {
            "version": "1.0.0",
            "certification": {
                "sigma": 0.25,
                "alpha": 1e-3,
                "n0": 100,
                "n": 100000,
                "mass": 1.0,
                "method": "bernstein",
                "hardmax_method": None,  # None means same as method
                "risk_split": "paper-literal",
                "rule": "R2",
            },
            "grid": {
                "maps": list(VALID_MAPS),
                "t_lower": 0.01,
                "t_upper": 50.0,
                "t_count": 50,
                "t_scale": TemperatureScale.LOG.value,
            },
            "advanced": {
                "max_concurrent_workers": 1,
                "log_level": LogLevel.WARNING.value,
                "seed": 0,
                "block_size": 4096,  # noise rows per RNG block
            },
        }

    @staticmethod
    def validate_settings(settings: Dict[str, Any]) -> ValidationResult:
        """Validate settings structure and values."""
        result = ValidationResult(is_valid=True, errors=[], warnings=[])

        required_keys = ["certification", "grid", "advanced"]
        for key in required_keys:
            if key not in settings:
                result.errors.append(f"Missing required section: {key}")
            elif not isinstance(settings[key], dict):
                result.errors.append(f"Section {key} must be a dictionary")

        if result.errors:
            result.is_valid = False
            return result

        SettingsSchema._validate_certification_section(settings["certification"], result)
        SettingsSchema._validate_grid_section(settings["grid"], result)
        SettingsSchema._validate_advanced_section(settings["advanced"], result)

        result.is_valid = len(result.errors) == 0
        return result

    @staticmethod
    def _validate_certification_section(cert: Dict[str, Any], result: ValidationResult) -> None:
        """Validate certification configuration section."""
        for key in ["sigma", "mass"]:
            if key in cert and cert[key] is not None:
                if not _is_number(cert[key]) or cert[key] <= 0:
                    result.errors.append(f"certification.{key} must be a positive number")

        if "alpha" in cert:
            alpha = cert["alpha"]
            if not _is_number(alpha) or not (0 < alpha < 1):
                result.errors.append("certification.alpha must be a number between 0 and 1 (exclusive)")
            elif alpha > 0.1:
                result.warnings.append("certification.alpha > 0.1 gives weak guarantees")

        for key in ["n0", "n"]:
            if key in cert:
                count = cert[key]
                if not isinstance(count, int) or isinstance(count, bool) or count < 2:
                    result.errors.append(f"certification.{key} must be an integer >= 2")

        for key in ["method", "hardmax_method"]:
            if key in cert and cert[key] is not None and cert[key] not in VALID_METHODS:
                result.errors.append(f"Invalid certification.{key}: {cert[key]}")

        if "risk_split" in cert and cert["risk_split"] not in VALID_RISK_SPLITS:
            result.errors.append(f"Invalid certification.risk_split: {cert['risk_split']}")

        if "rule" in cert and cert["rule"] not in VALID_RULES:
            result.errors.append(f"Invalid certification.rule: {cert['rule']}")

    @staticmethod
    def _validate_grid_section(grid: Dict[str, Any], result: ValidationResult) -> None:
        """Validate temperature/map grid section."""
        if "maps" in grid:
            maps = grid["maps"]
            if not isinstance(maps, list) or not maps:
                result.errors.append("grid.maps must be a nonempty list")
            elif not all(m in VALID_MAPS for m in maps):
                result.errors.append(f"grid.maps must contain only: {', '.join(VALID_MAPS)}")

        for key in ["t_lower", "t_upper"]:
            if key in grid and (not _is_number(grid[key]) or grid[key] <= 0):
                result.errors.append(f"grid.{key} must be a positive number")

        if _is_number(grid.get("t_lower")) and _is_number(grid.get("t_upper")):
            if grid["t_lower"] > grid["t_upper"]:
                result.errors.append("grid.t_lower must not exceed grid.t_upper")

        if "t_count" in grid:
            count = grid["t_count"]
            if not isinstance(count, int) or isinstance(count, bool) or count < 1:
                result.errors.append("grid.t_count must be a positive integer")
            elif count > 1000:
                result.warnings.append("grid.t_count > 1000 makes selection slow")

        if "t_scale" in grid:
            valid_scales = [scale.value for scale in TemperatureScale]
            if grid["t_scale"] not in valid_scales:
                result.errors.append(f"Invalid grid.t_scale: {grid['t_scale']}")

    @staticmethod
    def _validate_advanced_section(advanced: Dict[str, Any], result: ValidationResult) -> None:
        """Validate advanced configuration section."""
        if "max_concurrent_workers" in advanced:
            workers = advanced["max_concurrent_workers"]
            if not isinstance(workers, int) or workers <= 0:
                result.errors.append("advanced.max_concurrent_workers must be a positive integer")
            elif workers > 32:
                result.warnings.append("advanced.max_concurrent_workers > 32 may impact performance")

        if "log_level" in advanced:
            valid_levels = [level.value for level in LogLevel]
            if advanced["log_level"] not in valid_levels:
                result.errors.append(f"Invalid log_level: {advanced['log_level']}")

        if "seed" in advanced:
            seed = advanced["seed"]
            if not isinstance(seed, int) or isinstance(seed, bool) or not (0 <= seed < 2 ** 64):
                result.errors.append("advanced.seed must be an integer in [0, 2^64)")

        if "block_size" in advanced:
            block = advanced["block_size"]
            if not isinstance(block, int) or isinstance(block, bool) or block <= 0:
                result.errors.append("advanced.block_size must be a positive integer")
