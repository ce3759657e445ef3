from __future__ import annotations

import json
from pathlib import Path

import pytest

from ctem.engine import DEFAULT_PERSONA_DIR, Engine, EngineConfig

DATA_DIR = Path(__file__).parent.parent / "src" / "ctem" / "data"


@pytest.fixture
def data_dir() -> Path:
    return DATA_DIR


@pytest.fixture
def persona_dir() -> Path:
    return Path(DEFAULT_PERSONA_DIR)


def make_config(**overrides) -> EngineConfig:
    base = EngineConfig().to_dict()
    base.update(overrides)
    return EngineConfig.from_dict(base)


@pytest.fixture
def config() -> EngineConfig:
    return make_config()


@pytest.fixture
def engine(config) -> Engine:
    return Engine(config)


def load_json(path: Path):
    return json.loads(path.read_text("utf-8"))
