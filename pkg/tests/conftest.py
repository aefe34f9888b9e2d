# tests/conftest.py

import os

import pytest

from respirad.config_parser import parse_config
from respirad.dsp.scene_sim import synthesize_all
from respirad.models import RadarUnit, RunConfig, SceneConfig, TargetModel, WaveformConfig
from respirad.pipeline import run_pipeline

DATA_DIR = os.path.join(os.path.dirname(__file__), "data")

# 4 chirps por trama con periodo 20.48 ms: misma tasa lenta (48.83 Hz) que 1024 chirps seguidos
FRAME_PERIOD_S = 0.02048
SLOW_RATE_HZ = 1.0 / FRAME_PERIOD_S

TWO_SUBJECT_TEXT = """
# escena de dos sujetos
chirps_per_frame = 4
frame_period_s = 0.02048
duration_s = 60

radar.1.x_m = 0.50
radar.2.x_m = 1.50

target.1.x_m = 0.80
target.1.y_m = 1.00
target.1.breath_hz = 0.35

target.2.x_m = 1.10
target.2.y_m = 1.00
target.2.breath_hz = 0.40

expansion = 0
"""


def make_waveform(**overrides) -> WaveformConfig:
    params = dict(chirps_per_frame=4, frame_period=FRAME_PERIOD_S)
    params.update(overrides)
    return WaveformConfig(**params)


def make_scene(offset2: float = 0.0, snr_db=None, seed: int = 0, targets=None, **waveform) -> SceneConfig:
    if targets is None:
        targets = (
            TargetModel(position=(0.80, 1.00), breath_frequency=0.35),
            TargetModel(position=(1.10, 1.00), breath_frequency=0.40),
        )
    return SceneConfig(
        waveform=make_waveform(**waveform),
        radars=(RadarUnit(id=1, position_x=0.5), RadarUnit(id=2, position_x=1.5, start_offset=offset2)),
        targets=tuple(targets),
        noise_snr_db=snr_db,
        rng_seed=seed,
    )


def make_run_config(scene: SceneConfig, **overrides) -> RunConfig:
    params = dict(scene=scene, expansion=0)
    params.update(overrides)
    return RunConfig(**params)


@pytest.fixture
def waveform():
    return make_waveform()


@pytest.fixture
def two_subject_scene():
    return make_scene()


@pytest.fixture(scope="session")
def two_subject_cubes():
    return synthesize_all(make_scene())


@pytest.fixture(scope="session")
def two_subject_result(two_subject_cubes):
    return run_pipeline(two_subject_cubes, make_run_config(make_scene()))


@pytest.fixture
def two_subject_config_file(tmp_path):
    path = tmp_path / "escena.conf"
    path.write_text(TWO_SUBJECT_TEXT, encoding="utf-8")
    return str(path)


@pytest.fixture
def two_subject_config():
    return parse_config(TWO_SUBJECT_TEXT)
