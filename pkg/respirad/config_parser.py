# respirad/config_parser.py
# Archivo de configuración plano `clave = valor`, comentarios con '#',
# radares y blancos con prefijo indexado (radar.1.x_m, target.2.breath_hz, ...).

import logging
import re
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional, Tuple

from .constants import (
    DEFAULT_ADC_SAMPLE_RATE_HZ,
    DEFAULT_BAND_HZ,
    DEFAULT_BANDWIDTH_HZ,
    DEFAULT_BIN_EXPANSION,
    DEFAULT_BREATH_AMPLITUDE_M,
    DEFAULT_BREATH_FREQUENCY_HZ,
    DEFAULT_CFAR_GUARD_CELLS,
    DEFAULT_CFAR_PFA,
    DEFAULT_CFAR_TRAINING_CELLS,
    DEFAULT_CHIRP_DURATION_S,
    DEFAULT_CHIRPS_PER_FRAME,
    DEFAULT_DURATION_S,
    DEFAULT_F_START_HZ,
    DEFAULT_FAST_TIME_SAMPLES,
    DEFAULT_GAMMA_TH,
    DEFAULT_MAX_LAG_S,
    DEFAULT_PEAK_TIE_TOLERANCE,
    DEFAULT_PROFILE_OVERSAMPLE,
    DEFAULT_REFLECTIVITY,
    DEFAULT_RNG_SEED,
    DEFAULT_VIBRATION_AXIS,
    DEFAULT_WINDOW,
    DEFAULT_ZERO_PAD_FACTOR,
)
from .errors import ConfigSyntaxError, ConfigValueError
from .models import CfarParams, RadarUnit, RunConfig, SceneConfig, TargetModel, WaveformConfig

logger = logging.getLogger(__name__)

REQUIRED = object()  # marca de clave obligatoria

_GLOBAL_KEY_RE = re.compile(r"^[a-z][a-z0-9_]*$")
_INDEXED_KEY_RE = re.compile(r"^(radar|target)\.(\d+)\.([a-z][a-z0-9_]*)$")
_TRUE = {"true", "1", "yes", "si", "sí", "on"}
_FALSE = {"false", "0", "no", "off"}


def _parse_bool(raw: str) -> bool:
    value = raw.strip().lower()
    if value in _TRUE:
        return True
    if value in _FALSE:
        return False
    raise ValueError(f"'{raw}' no es un booleano (true/false)")


@dataclass(frozen=True)
class ConfigKey:
    kind: Callable[[str], Any]
    default: Any
    help: str

    @property
    def type_name(self) -> str:
        if self.kind is _parse_bool:
            return "bool"
        return getattr(self.kind, "__name__", "str")


# --- Esquema (también genera la tabla de --help) ---

GLOBAL_KEYS: Dict[str, ConfigKey] = {
    "f_start_hz": ConfigKey(float, DEFAULT_F_START_HZ, "Frecuencia inicial del chirp (Hz)"),
    "bandwidth_hz": ConfigKey(float, DEFAULT_BANDWIDTH_HZ, "Ancho de banda del chirp (Hz)"),
    "chirp_duration_s": ConfigKey(float, DEFAULT_CHIRP_DURATION_S, "Duración del chirp / PRI (s)"),
    "chirps_per_frame": ConfigKey(int, DEFAULT_CHIRPS_PER_FRAME, "Chirps integrados por trama"),
    "n_frames": ConfigKey(int, None, f"Número de tramas (por defecto {DEFAULT_DURATION_S:g} s de tramas)"),
    "duration_s": ConfigKey(float, None, "Duración de la captura (s); excluyente con n_frames"),
    "frame_period_s": ConfigKey(float, None, "Periodo de trama (s); por defecto chirps_per_frame x chirp_duration"),
    "fast_time_samples": ConfigKey(int, DEFAULT_FAST_TIME_SAMPLES, "Muestras ADC por chirp"),
    "adc_sample_rate_hz": ConfigKey(float, DEFAULT_ADC_SAMPLE_RATE_HZ, "Frecuencia de muestreo del ADC (Hz)"),
    "noise_snr_db": ConfigKey(float, None, "SNR por muestra del blanco más fuerte (dB); sin ruido si se omite"),
    "rng_seed": ConfigKey(int, DEFAULT_RNG_SEED, "Semilla del generador de ruido"),
    "cfar_guard_cells": ConfigKey(int, DEFAULT_CFAR_GUARD_CELLS, "Celdas de guarda CFAR por lado"),
    "cfar_training_cells": ConfigKey(int, DEFAULT_CFAR_TRAINING_CELLS, "Celdas de entrenamiento CFAR por lado"),
    "cfar_pfa": ConfigKey(float, DEFAULT_CFAR_PFA, "Probabilidad de falsa alarma CFAR"),
    "profile_oversample": ConfigKey(int, DEFAULT_PROFILE_OVERSAMPLE, "Sobremuestreo del perfil de rango para CFAR"),
    "window": ConfigKey(str, DEFAULT_WINDOW, "Ventana en tiempo rápido (rectangular | hann)"),
    "expansion": ConfigKey(int, DEFAULT_BIN_EXPANSION, "Bins vecinos añadidos a cada detección"),
    "band_lo_hz": ConfigKey(float, DEFAULT_BAND_HZ[0], "Borde inferior de la banda respiratoria (Hz)"),
    "band_hi_hz": ConfigKey(float, DEFAULT_BAND_HZ[1], "Borde superior de la banda respiratoria (Hz)"),
    "gamma_th": ConfigKey(float, DEFAULT_GAMMA_TH, "Umbral de |correlación| para aceptar un par"),
    "max_lag_s": ConfigKey(float, DEFAULT_MAX_LAG_S, "Retardo máximo de la correlación cruzada (s)"),
    "peak_tie_tolerance": ConfigKey(float, DEFAULT_PEAK_TIE_TOLERANCE, "Tolerancia relativa de empate entre picos"),
    "zero_pad_factor": ConfigKey(int, DEFAULT_ZERO_PAD_FACTOR, "Relleno de ceros del espectro de tasa"),
    "output_dir": ConfigKey(str, "salida", "Directorio de salida (--out tiene prioridad)"),
    "emit_intermediates": ConfigKey(_parse_bool, False, "Escribir CSV intermedios"),
}

RADAR_KEYS: Dict[str, ConfigKey] = {
    "x_m": ConfigKey(float, REQUIRED, "Posición x del radar (m)"),
    "d_m": ConfigKey(float, 0.0, "Altura del radar sobre el plano de los blancos (m)"),
    "start_offset_s": ConfigKey(float, 0.0, "Retardo de arranque del radar (s)"),
}

TARGET_KEYS: Dict[str, ConfigKey] = {
    "x_m": ConfigKey(float, REQUIRED, "Posición x del blanco (m)"),
    "y_m": ConfigKey(float, REQUIRED, "Posición y del blanco (m), > 0"),
    "breath_hz": ConfigKey(float, DEFAULT_BREATH_FREQUENCY_HZ, "Frecuencia respiratoria (Hz)"),
    "amplitude_m": ConfigKey(float, DEFAULT_BREATH_AMPLITUDE_M, "Amplitud del movimiento (m)"),
    "phase_rad": ConfigKey(float, 0.0, "Fase inicial de la respiración (rad)"),
    "reflectivity": ConfigKey(float, DEFAULT_REFLECTIVITY, "Amplitud sigma de la señal IF"),
    "axis_x": ConfigKey(float, DEFAULT_VIBRATION_AXIS[0], "Componente x del eje de vibración"),
    "axis_y": ConfigKey(float, DEFAULT_VIBRATION_AXIS[1], "Componente y del eje de vibración"),
}


def _format_default(key: ConfigKey) -> str:
    if key.default is REQUIRED:
        return "obligatoria"
    if key.default is None:
        return "-"
    return str(key.default)


def config_help() -> str:
    """Tabla de claves con sus valores por defecto, para el epílogo de --help."""
    lines = ["\b", "Claves del archivo de configuración (clave = valor):"]
    for prefix, table in (("", GLOBAL_KEYS), ("radar.N.", RADAR_KEYS), ("target.N.", TARGET_KEYS)):
        for name, key in table.items():
            lines.append(f"  {prefix + name:<28} {key.type_name:<6} {_format_default(key):<12} {key.help}")
    return "\n".join(lines)


# --- Lectura ---

def _tokenize(text: str) -> Dict[str, Tuple[str, int]]:
    entries: Dict[str, Tuple[str, int]] = {}
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigSyntaxError(f"se esperaba 'clave = valor' y se leyó '{raw_line.strip()}'", lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigSyntaxError("clave vacía", lineno)
        if not value:
            raise ConfigSyntaxError(f"la clave '{key}' no tiene valor", lineno)
        if key in entries:
            raise ConfigSyntaxError(
                f"clave '{key}' repetida (líneas {entries[key][1]} y {lineno})", lineno
            )
        entries[key] = (value, lineno)
    return entries


def _convert(key_name: str, spec: ConfigKey, raw: str, lineno: int) -> Any:
    try:
        return spec.kind(raw)
    except ValueError as e:
        raise ConfigSyntaxError(f"valor inválido para '{key_name}' ({spec.type_name}): {e}", lineno) from e


def _resolve_block(label: str, table: Dict[str, ConfigKey], given: Dict[str, Any]) -> Dict[str, Any]:
    values = {}
    for name, spec in table.items():
        if name in given:
            values[name] = given[name]
        elif spec.default is REQUIRED:
            raise ConfigValueError(f"falta la clave obligatoria '{label}.{name}'")
        else:
            values[name] = spec.default
    return values


def parse_config(text: str, defaults: Optional[Dict[str, Any]] = None) -> RunConfig:
    """
    Valida el texto completo y devuelve un RunConfig.
    `defaults` sustituye valores por defecto de claves globales (p.ej. ajustes del .env).
    """
    entries = _tokenize(text)

    globals_: Dict[str, Any] = {}
    indexed: Dict[str, Dict[int, Dict[str, Any]]] = {"radar": {}, "target": {}}
    for key, (raw, lineno) in entries.items():
        match = _INDEXED_KEY_RE.match(key)
        if match:
            kind, index, field_name = match.group(1), int(match.group(2)), match.group(3)
            table = RADAR_KEYS if kind == "radar" else TARGET_KEYS
            if field_name not in table:
                raise ConfigSyntaxError(f"clave desconocida '{key}'", lineno)
            indexed[kind].setdefault(index, {})[field_name] = _convert(key, table[field_name], raw, lineno)
            continue
        if not _GLOBAL_KEY_RE.match(key) or key not in GLOBAL_KEYS:
            raise ConfigSyntaxError(f"clave desconocida '{key}'", lineno)
        globals_[key] = _convert(key, GLOBAL_KEYS[key], raw, lineno)

    overrides = defaults or {}
    g = {name: globals_.get(name, overrides.get(name, spec.default)) for name, spec in GLOBAL_KEYS.items()}

    if g["n_frames"] is not None and g["duration_s"] is not None:
        raise ConfigValueError("n_frames y duration_s son excluyentes: indique sólo uno")
    n_frames: Optional[int] = g["n_frames"]
    if g["duration_s"] is not None:
        if g["duration_s"] <= 0:
            raise ConfigValueError(f"duration_s debe ser > 0 (recibido {g['duration_s']})")
        frame_interval = g["frame_period_s"] or g["chirps_per_frame"] * g["chirp_duration_s"]
        n_frames = max(1, int(round(g["duration_s"] / frame_interval)))

    waveform = WaveformConfig(
        f_start=g["f_start_hz"],
        bandwidth=g["bandwidth_hz"],
        chirp_duration=g["chirp_duration_s"],
        chirps_per_frame=g["chirps_per_frame"],
        n_frames=n_frames,
        fast_time_samples=g["fast_time_samples"],
        adc_sample_rate=g["adc_sample_rate_hz"],
        frame_period=g["frame_period_s"],
    )

    radars: List[RadarUnit] = []
    for index in sorted(indexed["radar"]):
        values = _resolve_block(f"radar.{index}", RADAR_KEYS, indexed["radar"][index])
        radars.append(RadarUnit(
            id=index,
            position_x=values["x_m"],
            plane_offset_d=values["d_m"],
            start_offset=values["start_offset_s"],
        ))

    targets: List[TargetModel] = []
    for index in sorted(indexed["target"]):
        values = _resolve_block(f"target.{index}", TARGET_KEYS, indexed["target"][index])
        targets.append(TargetModel(
            position=(values["x_m"], values["y_m"]),
            breath_frequency=values["breath_hz"],
            breath_amplitude=values["amplitude_m"],
            breath_phase=values["phase_rad"],
            reflectivity=values["reflectivity"],
            vibration_axis=(values["axis_x"], values["axis_y"]),
        ))

    scene = SceneConfig(
        waveform=waveform,
        radars=tuple(radars),
        targets=tuple(targets),
        noise_snr_db=g["noise_snr_db"],
        rng_seed=g["rng_seed"],
    )
    config = RunConfig(
        scene=scene,
        cfar=CfarParams(
            guard_cells=g["cfar_guard_cells"],
            training_cells=g["cfar_training_cells"],
            pfa=g["cfar_pfa"],
        ),
        gamma_th=g["gamma_th"],
        max_lag=g["max_lag_s"],
        band=(g["band_lo_hz"], g["band_hi_hz"]),
        expansion=g["expansion"],
        output_dir=g["output_dir"],
        emit_intermediates=g["emit_intermediates"],
        window=g["window"],
        zero_pad_factor=g["zero_pad_factor"],
        profile_oversample=g["profile_oversample"],
        peak_tie_tolerance=g["peak_tie_tolerance"],
    )
    logger.debug(
        f"Configuración leída: {len(radars)} radares, {len(targets)} blancos, "
        f"{waveform.n_frames} tramas a {waveform.slow_rate:.3f} Hz"
    )
    return config
