# tests/test_config_parser.py

import pytest

from respirad.config_parser import config_help, parse_config
from respirad.errors import ConfigSyntaxError, ConfigValueError
from respirad.pipeline import load_run_config

MINIMAL = """
radar.1.x_m = 0.5
radar.2.x_m = 1.5
"""


def test_minimal_config_uses_defaults():
    config = parse_config(MINIMAL)
    wf = config.scene.waveform
    assert [r.id for r in config.scene.radars] == [1, 2]
    assert [r.position_x for r in config.scene.radars] == [0.5, 1.5]
    assert config.scene.targets == ()
    assert wf.bandwidth == 1.5e9
    assert wf.bin_spacing == pytest.approx(0.0999308, rel=1e-6)
    assert config.gamma_th == 0.3
    assert config.max_lag == 5.0
    assert config.band == (0.1, 0.7)
    assert config.expansion == 1
    assert config.cfar.guard_cells == 2 and config.cfar.training_cells == 8
    assert config.scene.noise_snr_db is None


def test_reference_scene_text(two_subject_config):
    scene = two_subject_config.scene
    assert scene.waveform.n_frames == 2930
    assert scene.waveform.slow_rate == pytest.approx(1 / 0.02048)
    assert [t.position for t in scene.targets] == [(0.8, 1.0), (1.1, 1.0)]
    assert [t.breath_frequency for t in scene.targets] == [0.35, 0.4]
    assert two_subject_config.expansion == 0


def test_comments_and_blank_lines_are_ignored():
    text = "# cabecera\n\nradar.1.x_m = 0.5   # izquierda\n   \nradar.2.x_m = 1.5\n"
    assert len(parse_config(text).scene.radars) == 2


def test_duplicate_key_reports_both_lines():
    text = "radar.1.x_m = 0.5\nradar.2.x_m = 1.5\ngamma_th = 0.3\n\ngamma_th = 0.4\n"
    with pytest.raises(ConfigSyntaxError) as excinfo:
        parse_config(text)
    assert excinfo.value.line == 5
    assert "líneas 3 y 5" in str(excinfo.value)


def test_negative_bandwidth_is_semantic_error():
    with pytest.raises(ConfigValueError) as excinfo:
        parse_config(MINIMAL + "bandwidth_hz = -1\n")
    assert "bandwidth" in str(excinfo.value)


def test_unknown_key_is_rejected():
    with pytest.raises(ConfigSyntaxError) as excinfo:
        parse_config(MINIMAL + "bandwith_hz = 1e9\n")
    assert "desconocida" in str(excinfo.value)
    assert excinfo.value.line == 4


def test_unknown_indexed_field_is_rejected():
    with pytest.raises(ConfigSyntaxError):
        parse_config(MINIMAL + "target.1.speed = 3\n")


def test_line_without_equals_reports_line_number():
    with pytest.raises(ConfigSyntaxError) as excinfo:
        parse_config("radar.1.x_m = 0.5\nradar.2.x_m 1.5\n")
    assert excinfo.value.line == 2
    assert str(excinfo.value).startswith("línea 2: ")


def test_bad_number_reports_line_number():
    with pytest.raises(ConfigSyntaxError) as excinfo:
        parse_config(MINIMAL + "gamma_th = alto\n")
    assert excinfo.value.line == 4


def test_missing_required_target_coordinate():
    with pytest.raises(ConfigValueError) as excinfo:
        parse_config(MINIMAL + "target.1.x_m = 0.8\n")
    assert "target.1.y_m" in str(excinfo.value)


def test_single_radar_is_rejected():
    with pytest.raises(ConfigValueError):
        parse_config("radar.1.x_m = 0.5\n")


def test_frames_and_duration_are_exclusive():
    with pytest.raises(ConfigValueError):
        parse_config(MINIMAL + "n_frames = 100\nduration_s = 10\n")


def test_duration_sets_frame_count():
    config = parse_config(MINIMAL + "chirps_per_frame = 4\nframe_period_s = 0.02048\nduration_s = 30\n")
    assert config.scene.waveform.n_frames == 1465


def test_gamma_out_of_range_is_semantic_error():
    with pytest.raises(ConfigValueError):
        parse_config(MINIMAL + "gamma_th = 1.5\n")


def test_boolean_values():
    assert parse_config(MINIMAL + "emit_intermediates = sí\n").emit_intermediates is True
    assert parse_config(MINIMAL + "emit_intermediates = off\n").emit_intermediates is False
    with pytest.raises(ConfigSyntaxError):
        parse_config(MINIMAL + "emit_intermediates = quizá\n")


def test_defaults_override_schema_but_not_file():
    assert parse_config(MINIMAL, defaults={"profile_oversample": 4}).profile_oversample == 4
    text = MINIMAL + "profile_oversample = 8\n"
    assert parse_config(text, defaults={"profile_oversample": 4}).profile_oversample == 8


def test_radar_offsets_and_heights():
    text = "radar.1.x_m = 0.5\nradar.1.d_m = 0.3\nradar.2.x_m = 1.5\nradar.2.d_m = 0.3\nradar.2.start_offset_s = 0.5\n"
    radars = parse_config(text).scene.radars
    assert [r.plane_offset_d for r in radars] == [0.3, 0.3]
    assert radars[1].start_offset == 0.5


def test_help_lists_every_key_with_default():
    text = config_help()
    assert text.startswith("\b")
    for key in ("bandwidth_hz", "gamma_th", "radar.N.x_m", "target.N.breath_hz", "duration_s"):
        assert key in text
    assert "obligatoria" in text


def test_negative_seed_is_semantic_error():
    with pytest.raises(ConfigValueError) as excinfo:
        parse_config(MINIMAL + "rng_seed = -1\n")
    assert "rng_seed" in str(excinfo.value)


def test_config_file_with_bom_is_accepted(tmp_path):
    path = tmp_path / "bom.conf"
    path.write_bytes(b"\xef\xbb\xbf" + MINIMAL.lstrip().encode("utf-8"))
    config = load_run_config(str(path))
    assert [r.position_x for r in config.scene.radars] == [0.5, 1.5]
