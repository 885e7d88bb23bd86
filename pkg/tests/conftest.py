# tests/conftest.py

import os
from pathlib import Path

import pytest

from src.core.config import load_settings
from src.core.logging import configure_logging
from src.domain.entities.evolution import EvolutionSettings
from src.domain.entities.readout_model import ReadoutModel

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(autouse=True, scope="session")
def _logging():
    configure_logging()


@pytest.fixture(autouse=True)
def _clean_env(monkeypatch):
    """Keep ADINV_* variables of the developer's shell out of the tests"""
    for key in list(os.environ):
        if key.startswith("ADINV_"):
            monkeypatch.delenv(key)


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture
def settings(tmp_path):
    return load_settings(overrides={'output_dir': tmp_path})


@pytest.fixture
def readout() -> ReadoutModel:
    return ReadoutModel.from_background(0.93, 0.022, 100)


@pytest.fixture
def fast_settings() -> EvolutionSettings:
    """Looser tolerances for the long fitting tests"""
    return EvolutionSettings(rel_tol=1e-6, abs_tol=1e-8)
