"""
Configuration data classes for SmoothCert certification runs.

GridConfig describes the (map, temperature) search grid together with
the sampling and risk parameters of one run, and provides validation.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from ..certify.concentration import ConcentrationMethod, RiskSplit
from ..certify.radius import RadiusRule
from ..certify.simplex_maps import MapKind, MapSpec
from ..config.settings_schema import TemperatureScale
from ..errors import ConfigError, DomainError

logger = logging.getLogger(__name__)

DEFAULT_BLOCK_SIZE = 4096


@dataclass
class GridConfig:
    """Search grid and sampling parameters for one certification run."""

    # Grid
    map_kinds: List[str] = field(default_factory=lambda: ["hardmax", "softmax", "sparsemax"])
    t_lower: float = 0.01
    t_upper: float = 50.0
    t_count: int = 50
    t_scale: str = TemperatureScale.LOG.value
    mass: float = 1.0

    # Sampling
    n0: int = 100
    n: int = 100000
    sigma: float = 0.25
    seed: int = 0
    block_size: int = DEFAULT_BLOCK_SIZE

    # Risk correction
    alpha: float = 1e-3
    method: str = ConcentrationMethod.BERNSTEIN.value
    hardmax_method: Optional[str] = None  # None means same as method
    risk_split: str = RiskSplit.LITERAL.value

    # Radius
    rule: str = RadiusRule.R2.value
    lipschitz: Optional[float] = None  # base Lipschitz constant of s o f, for R1

    def validate(self) -> tuple[bool, str]:
        """Validate the grid configuration.

        Returns:
            tuple[bool, str]: (is_valid, error_message)
        """
        if not self.map_kinds:
            return False, "At least one simplex map must be selected"
        valid_maps = [kind.value for kind in MapKind]
        for kind in self.map_kinds:
            if kind not in valid_maps:
                return False, f"Invalid map: {kind}. Must be one of {valid_maps}"

        if not self.t_lower > 0:
            return False, f"t_lower must be positive, got {self.t_lower}"
        if self.t_upper < self.t_lower:
            return False, f"t_upper ({self.t_upper}) must not be below t_lower ({self.t_lower})"
        if self.t_count < 1:
            return False, "t_count must be at least 1"
        valid_scales = [scale.value for scale in TemperatureScale]
        if self.t_scale not in valid_scales:
            return False, f"Invalid t_scale: {self.t_scale}. Must be one of {valid_scales}"

        if not self.mass > 0:
            return False, f"Mass must be positive, got {self.mass}"
        if not self.sigma > 0:
            return False, f"Noise level sigma must be positive, got {self.sigma}"
        if self.n0 < 2 or self.n < 2:
            return False, f"n0 and n must be at least 2, got n0={self.n0}, n={self.n}"
        if not (0 < self.alpha < 1):
            return False, f"alpha must lie in (0, 1), got {self.alpha}"
        if not (0 <= self.seed < 2 ** 64):
            return False, f"Seed must be a 64-bit unsigned integer, got {self.seed}"
        if self.block_size < 1:
            return False, "block_size must be positive"

        try:
            ConcentrationMethod.parse(self.method)
            if self.hardmax_method is not None:
                ConcentrationMethod.parse(self.hardmax_method)
            RiskSplit.parse(self.risk_split)
            RadiusRule.parse(self.rule)
        except DomainError as e:
            return False, str(e)

        if self.lipschitz is not None and not self.lipschitz > 0:
            return False, f"Lipschitz constant must be positive, got {self.lipschitz}"

        return True, ""

    def require_valid(self) -> None:
        is_valid, message = self.validate()
        if not is_valid:
            raise ConfigError(message)

    @classmethod
    def from_settings(cls, settings: Dict[str, Any], **overrides) -> "GridConfig":
        """Build from a ConfigManager settings dict; None-valued overrides are ignored."""
        cert = settings.get("certification", {})
        grid = settings.get("grid", {})
        advanced = settings.get("advanced", {})
        values = {
            "map_kinds": list(grid.get("maps", cls().map_kinds)),
            "t_lower": grid.get("t_lower", cls.t_lower),
            "t_upper": grid.get("t_upper", cls.t_upper),
            "t_count": grid.get("t_count", cls.t_count),
            "t_scale": grid.get("t_scale", cls.t_scale),
            "mass": cert.get("mass", cls.mass),
            "n0": cert.get("n0", cls.n0),
            "n": cert.get("n", cls.n),
            "sigma": cert.get("sigma", cls.sigma),
            "alpha": cert.get("alpha", cls.alpha),
            "method": cert.get("method", cls.method),
            "hardmax_method": cert.get("hardmax_method"),
            "risk_split": cert.get("risk_split", cls.risk_split),
            "rule": cert.get("rule", cls.rule),
            "seed": advanced.get("seed", cls.seed),
            "block_size": advanced.get("block_size", cls.block_size),
        }
        values.update({key: value for key, value in overrides.items() if value is not None})
        return cls(**values)

    def temperatures(self) -> np.ndarray:
        if self.t_count == 1:
            return np.array([float(self.t_lower)])
        if self.t_scale == TemperatureScale.LINEAR.value:
            return np.linspace(self.t_lower, self.t_upper, self.t_count)
        return np.geomspace(self.t_lower, self.t_upper, self.t_count)

    def candidates(self) -> List[MapSpec]:
        """
        MapSpecs in grid order: temperature outer, map inner.

        Hardmax ignores the temperature and is listed once, at t = 1, in
        the first temperature round.
        """
        kinds = list(dict.fromkeys(MapKind(kind) for kind in self.map_kinds))
        specs = []
        for index, temperature in enumerate(self.temperatures()):
            for kind in kinds:
                if kind is MapKind.HARDMAX:
                    if index == 0:
                        specs.append(MapSpec(kind, 1.0, self.mass))
                else:
                    specs.append(MapSpec(kind, float(temperature), self.mass))
        return specs

    def method_for(self, kind: MapKind) -> ConcentrationMethod:
        """Concentration method for a map; Clopper-Pearson only applies to hardmax."""
        if kind is MapKind.HARDMAX and self.hardmax_method is not None:
            return ConcentrationMethod.parse(self.hardmax_method)
        method = ConcentrationMethod.parse(self.method)
        if method is ConcentrationMethod.CLOPPER_PEARSON and kind is not MapKind.HARDMAX:
            return ConcentrationMethod.BERNSTEIN
        return method
