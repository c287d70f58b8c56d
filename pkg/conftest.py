"""
Pytest configuration and shared fixtures for SmoothCert tests.

This module provides common fixtures: temporary directories, isolated
settings, small certification grids, synthetic classifiers and score
files.
"""

import json
import shutil
import sys
import tempfile
from pathlib import Path
from typing import Any, Dict

import numpy as np
import pytest

# Add the project root to sys.path for imports
project_root = Path(__file__).parent
sys.path.insert(0, str(project_root))

from app.config.settings_schema import SettingsSchema
from app.runner.config_models import GridConfig
from app.utils.score_files import ScoreFile


@pytest.fixture(autouse=True)
def isolated_environment(monkeypatch):
    """Keep user settings and SMOOTHCERT_* variables out of every test."""
    for name in ("SMOOTHCERT_CONFIG", "SMOOTHCERT_LOG_LEVEL", "SMOOTHCERT_SEED", "SMOOTHCERT_JOBS"):
        monkeypatch.delenv(name, raising=False)


@pytest.fixture
def temp_dir():
    """Create a temporary directory for test files."""
    temp_dir = tempfile.mkdtemp()
    yield Path(temp_dir)
    shutil.rmtree(temp_dir, ignore_errors=True)


@pytest.fixture
def config_path(temp_dir) -> Path:
    """Path of a settings file that does not exist yet."""
    return temp_dir / "settings.json"


@pytest.fixture
def sample_settings() -> Dict[str, Any]:
    """Valid settings differing from the defaults in a few places."""
    settings = SettingsSchema.get_default_settings()
    settings["certification"].update({"sigma": 0.5, "n0": 200, "n": 5000, "method": "hoeffding"})
    settings["grid"].update({"maps": ["hardmax", "sparsemax"], "t_count": 5, "t_scale": "linear"})
    settings["advanced"].update({"seed": 42, "log_level": "info"})
    return settings


@pytest.fixture
def sample_config_file(config_path, sample_settings) -> Path:
    config_path.write_text(json.dumps(sample_settings), encoding="utf-8")
    return config_path


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240531)


@pytest.fixture
def small_grid() -> GridConfig:
    """A grid small enough for quick engine tests."""
    return GridConfig(
        map_kinds=["hardmax", "softmax", "sparsemax"],
        t_lower=0.05,
        t_upper=5.0,
        t_count=6,
        n0=400,
        n=4000,
        sigma=0.25,
        alpha=1e-3,
        seed=7,
        block_size=512,
    )


def near_tied_logits(points: np.ndarray) -> np.ndarray:
    """Two classes whose logit gap is 0.1 or -0.02 depending on the sign of x_1."""
    points = np.asarray(points, dtype=np.float64)
    gap = np.where(points[:, 0] > 0, 0.1, -0.02)
    return np.column_stack([gap, np.zeros(points.shape[0])])


@pytest.fixture
def near_tied_classifier():
    return near_tied_logits


@pytest.fixture
def sample_score_file(rng) -> ScoreFile:
    """Three inputs of 300 x 3 logits favouring class 0, 1 and 2 respectively."""
    blocks = []
    for k in range(3):
        block = rng.normal(0.0, 0.5, size=(300, 3))
        block[:, k] += 2.0
        blocks.append(block)
    return ScoreFile(num_classes=3, samples=300, sigma=0.25, input_ids=[0, 1, 2], blocks=blocks)
