"""Shared fixtures: settings isolated from the caller's environment, intrinsics, scenes."""

import numpy as np
import pytest

from driverse.config import Settings, load_settings, tsa_config
from driverse.models import Intrinsics, ScenarioKind, ScenarioSpec
from driverse.services.synth_service import DEFAULT_INTRINSICS, build_scene

SETTINGS_ENV = [f"{Settings.model_config['env_prefix']}{name}".upper() for name in Settings.model_fields]


@pytest.fixture(autouse=True)
def clean_env(monkeypatch, tmp_path):
    for name in SETTINGS_ENV:
        monkeypatch.delenv(name, raising=False)
    # keep a stray .env in the working directory out of the settings
    monkeypatch.chdir(tmp_path)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def settings():
    return load_settings()


@pytest.fixture
def cfg(settings):
    return tsa_config(settings)


@pytest.fixture
def hd_intrinsics():
    return Intrinsics(fx=1000.0, fy=1000.0, cx=960.0, cy=540.0, width=1920, height=1080)


@pytest.fixture
def synth_intrinsics():
    return DEFAULT_INTRINSICS


def make_scene(kind: ScenarioKind, speed: float, duration: float, seed: int = 0, **kwargs):
    spec = ScenarioSpec(kind=kind, speed=speed, duration=duration, frame_rate=10.0, seed=seed, **kwargs)
    return build_scene(spec)
