# respirad/models.py
# Tipos de dominio compartidos por todos los módulos.
# Las configuraciones son inmutables (frozen) y se validan al construirse.

import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from .constants import (
    DEFAULT_ADC_SAMPLE_RATE_HZ,
    DEFAULT_BAND_HZ,
    DEFAULT_BANDWIDTH_HZ,
    DEFAULT_BIN_EXPANSION,
    DEFAULT_BREATH_AMPLITUDE_M,
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
    SPEED_OF_LIGHT,
    SUPPORTED_WINDOWS,
)
from .errors import ConfigValueError

# Tolerancia relativa para comparaciones entre parámetros derivados de floats
_REL_TOL = 1e-9


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise ConfigValueError(message)


# --- Escena y forma de onda ---

@dataclass(frozen=True)
class WaveformConfig:
    f_start: float = DEFAULT_F_START_HZ
    bandwidth: float = DEFAULT_BANDWIDTH_HZ
    chirp_duration: float = DEFAULT_CHIRP_DURATION_S
    chirps_per_frame: int = DEFAULT_CHIRPS_PER_FRAME
    n_frames: Optional[int] = None  # None -> DEFAULT_DURATION_S de tramas
    fast_time_samples: int = DEFAULT_FAST_TIME_SAMPLES
    adc_sample_rate: float = DEFAULT_ADC_SAMPLE_RATE_HZ
    frame_period: Optional[float] = None  # None -> chirps consecutivos sin tiempo muerto

    def __post_init__(self):
        _require(self.bandwidth > 0, f"bandwidth debe ser > 0 (recibido {self.bandwidth})")
        _require(self.chirp_duration > 0, f"chirp_duration debe ser > 0 (recibido {self.chirp_duration})")
        _require(self.adc_sample_rate > 0, f"adc_sample_rate debe ser > 0 (recibido {self.adc_sample_rate})")
        _require(self.f_start > 0, f"f_start debe ser > 0 (recibido {self.f_start})")
        _require(self.chirps_per_frame >= 1, "chirps_per_frame debe ser >= 1")
        _require(self.fast_time_samples >= 1, "fast_time_samples debe ser >= 1")
        _require(
            self.fast_time_samples <= self.adc_sample_rate * self.chirp_duration * (1 + _REL_TOL),
            f"fast_time_samples ({self.fast_time_samples}) no cabe en un chirp: "
            f"adc_sample_rate x chirp_duration = {self.adc_sample_rate * self.chirp_duration:g}",
        )
        if self.frame_period is not None:
            _require(
                self.frame_period >= self.chirps_per_frame * self.chirp_duration * (1 - _REL_TOL),
                f"frame_period ({self.frame_period:g} s) es menor que chirps_per_frame x chirp_duration",
            )
        if self.n_frames is None:
            object.__setattr__(self, "n_frames", max(1, int(round(DEFAULT_DURATION_S / self.frame_interval))))
        _require(self.n_frames >= 1, "n_frames debe ser >= 1")

    @property
    def slope(self) -> float:
        """Pendiente de la rampa, gamma = B / T_c (Hz/s)."""
        return self.bandwidth / self.chirp_duration

    @property
    def center_frequency(self) -> float:
        return self.f_start + self.bandwidth / 2.0

    @property
    def frame_interval(self) -> float:
        if self.frame_period is not None:
            return self.frame_period
        return self.chirp_duration * self.chirps_per_frame

    @property
    def slow_rate(self) -> float:
        return 1.0 / self.frame_interval

    @property
    def duration(self) -> float:
        return self.n_frames * self.frame_interval

    @property
    def bin_spacing(self) -> float:
        """Separación entre bins de rango: c * fs / (2 * gamma * N)."""
        return SPEED_OF_LIGHT * self.adc_sample_rate / (2.0 * self.slope * self.fast_time_samples)

    @property
    def has_idle_time(self) -> bool:
        return self.frame_period is not None and not math.isclose(
            self.frame_period, self.chirp_duration * self.chirps_per_frame, rel_tol=_REL_TOL
        )


@dataclass(frozen=True)
class RadarUnit:
    id: int
    position_x: float
    plane_offset_d: float = 0.0
    start_offset: float = 0.0

    def __post_init__(self):
        _require(self.plane_offset_d >= 0, f"radar {self.id}: plane_offset_d debe ser >= 0")
        _require(self.start_offset >= 0, f"radar {self.id}: start_offset debe ser >= 0")


@dataclass(frozen=True)
class TargetModel:
    position: Tuple[float, float]
    breath_frequency: float
    breath_amplitude: float = DEFAULT_BREATH_AMPLITUDE_M
    breath_phase: float = 0.0
    reflectivity: float = DEFAULT_REFLECTIVITY
    vibration_axis: Tuple[float, float] = DEFAULT_VIBRATION_AXIS

    def __post_init__(self):
        _require(self.position[1] > 0, f"el blanco en {self.position} debe tener y > 0")
        _require(self.breath_frequency > 0, "breath_frequency debe ser > 0")
        _require(self.breath_amplitude >= 0, "breath_amplitude debe ser >= 0")
        norm = math.hypot(*self.vibration_axis)
        _require(abs(norm - 1.0) <= 1e-9, f"vibration_axis debe ser unitario (|v| = {norm:g})")


@dataclass(frozen=True)
class SceneConfig:
    waveform: WaveformConfig
    radars: Tuple[RadarUnit, ...]
    targets: Tuple[TargetModel, ...] = ()
    noise_snr_db: Optional[float] = None
    rng_seed: int = DEFAULT_RNG_SEED

    def __post_init__(self):
        object.__setattr__(self, "radars", tuple(self.radars))
        object.__setattr__(self, "targets", tuple(self.targets))
        _require(len(self.radars) >= 2, "se necesitan al menos 2 radares para multilaterar")
        _require(self.rng_seed >= 0, f"rng_seed debe ser >= 0 (recibido {self.rng_seed})")
        ids = [radar.id for radar in self.radars]
        _require(len(set(ids)) == len(ids), f"ids de radar repetidos: {ids}")
        xs = [radar.position_x for radar in self.radars]
        _require(len(set(xs)) == len(xs), f"las posiciones x de los radares deben ser distintas: {xs}")
        nyquist = self.waveform.slow_rate / 2.0
        for target in self.targets:
            _require(
                target.breath_frequency < nyquist,
                f"breath_frequency {target.breath_frequency:g} Hz fuera de (0, f_slow/2 = {nyquist:g} Hz)",
            )

    def radar(self, radar_id: int) -> RadarUnit:
        for radar in self.radars:
            if radar.id == radar_id:
                return radar
        raise ConfigValueError(f"radar_id {radar_id} no existe en la escena")


@dataclass(frozen=True, eq=False)
class DataCube:
    radar_id: int
    samples: np.ndarray  # complejo, [trama][chirp][muestra rápida]
    waveform: WaveformConfig
    start_offset: float = 0.0

    def __post_init__(self):
        expected = (self.waveform.n_frames, self.waveform.chirps_per_frame, self.waveform.fast_time_samples)
        _require(self.samples.shape == expected, f"cubo con forma {self.samples.shape}, se esperaba {expected}")
        _require(bool(np.all(np.isfinite(self.samples))), "el cubo contiene valores no finitos")


# --- Procesado de rango ---

@dataclass(frozen=True, eq=False)
class RangeTimeMap:
    radar_id: int
    values: np.ndarray  # complejo, [trama lenta][bin de rango]
    bin_spacing: float
    slow_rate: float
    start_offset: float = 0.0
    window: str = DEFAULT_WINDOW

    @property
    def n_frames(self) -> int:
        return self.values.shape[0]

    @property
    def n_range_bins(self) -> int:
        return self.values.shape[1]

    @property
    def ranges(self) -> np.ndarray:
        return np.arange(self.n_range_bins) * self.bin_spacing


@dataclass(frozen=True)
class Detection:
    bin_index: int
    range: float
    snr_estimate: float


@dataclass(frozen=True)
class CfarParams:
    guard_cells: int = DEFAULT_CFAR_GUARD_CELLS
    training_cells: int = DEFAULT_CFAR_TRAINING_CELLS
    pfa: float = DEFAULT_CFAR_PFA

    def __post_init__(self):
        _require(0 < self.pfa < 1, f"pfa debe estar en (0, 1) (recibido {self.pfa})")
        _require(self.training_cells >= 2, "training_cells debe ser >= 2")
        _require(self.guard_cells >= 0, "guard_cells debe ser >= 0")


# --- Señales de respiración ---

@dataclass(frozen=True, eq=False)
class RespSignal:
    radar_id: int
    bin_index: int
    range: float
    displacement: np.ndarray  # metros, a slow_rate
    slow_rate: float
    start_offset: float = 0.0

    def __post_init__(self):
        _require(bool(np.all(np.isfinite(self.displacement))), "señal de respiración con valores no finitos")

    @property
    def times(self) -> np.ndarray:
        return self.start_offset + np.arange(self.displacement.size) / self.slow_rate


# --- Asociación ---

@dataclass(frozen=True, eq=False)
class CorrelationFunction:
    lags: np.ndarray      # segundos
    values: np.ndarray    # normalizados a [-1, 1]
    pair: Tuple[int, int]  # (bin m del radar 1, bin k del radar 2)

    def __post_init__(self):
        _require(self.lags.size % 2 == 1, "la función de correlación debe tener longitud impar")
        _require(bool(np.all(np.abs(self.values) <= 1.0)), "|R| debe ser <= 1")


@dataclass(frozen=True)
class PairResult:
    m: int
    k: int
    range1: float
    range2: float
    peak_lag: float
    peak_value: float
    accepted: bool


@dataclass(frozen=True)
class AssociationSet:
    target_id: int
    pairs: Tuple[PairResult, ...]
    representative_ranges: Tuple[float, float]
    position: Optional[Tuple[float, float]] = None

    def __post_init__(self):
        object.__setattr__(self, "pairs", tuple(self.pairs))
        _require(len(self.pairs) > 0, f"el conjunto C_{self.target_id} está vacío")
        _require(all(p.accepted for p in self.pairs), f"C_{self.target_id} contiene pares no aceptados")


@dataclass(frozen=True)
class Geometry:
    a: float
    b: float
    d: float = 0.0

    def __post_init__(self):
        _require(self.a != self.b, "los radares deben estar en posiciones distintas (a != b)")
        _require(self.d >= 0, "d debe ser >= 0")


@dataclass(frozen=True)
class Candidate:
    ranges: Tuple[float, float]
    position: Optional[Tuple[float, float]]
    reason: Optional[str] = None  # motivo de inviabilidad

    @property
    def feasible(self) -> bool:
        return self.position is not None


# --- Estimación espectral ---

@dataclass(frozen=True, eq=False)
class AveragedAutocorrelation:
    target_id: int
    lags: np.ndarray
    values: np.ndarray
    n_pairs: int


@dataclass(frozen=True, eq=False)
class RateSpectrum:
    target_id: int
    frequencies: np.ndarray
    power: np.ndarray
    rate_bpm: float
    band: Tuple[float, float]


# --- Ejecución ---

@dataclass(frozen=True)
class RunConfig:
    scene: SceneConfig
    cfar: CfarParams = field(default_factory=CfarParams)
    gamma_th: float = DEFAULT_GAMMA_TH
    max_lag: float = DEFAULT_MAX_LAG_S
    band: Tuple[float, float] = DEFAULT_BAND_HZ
    expansion: int = DEFAULT_BIN_EXPANSION
    output_dir: str = "salida"
    emit_intermediates: bool = False
    window: str = DEFAULT_WINDOW
    zero_pad_factor: int = DEFAULT_ZERO_PAD_FACTOR
    profile_oversample: int = DEFAULT_PROFILE_OVERSAMPLE
    peak_tie_tolerance: float = DEFAULT_PEAK_TIE_TOLERANCE

    def __post_init__(self):
        _require(0 < self.gamma_th < 1, f"gamma_th debe estar en (0, 1) (recibido {self.gamma_th})")
        _require(self.max_lag > 0, "max_lag_s debe ser > 0")
        lo, hi = self.band
        _require(0 < lo < hi < self.scene.waveform.slow_rate / 2, f"banda {self.band} fuera de (0, f_slow/2)")
        _require(self.expansion >= 0, "expansion debe ser >= 0")
        _require(self.window in SUPPORTED_WINDOWS, f"ventana '{self.window}' no soportada {SUPPORTED_WINDOWS}")
        _require(self.zero_pad_factor >= 1, "zero_pad_factor debe ser >= 1")
        _require(self.profile_oversample >= 1, "profile_oversample debe ser >= 1")
        _require(0 <= self.peak_tie_tolerance < 1, "peak_tie_tolerance debe estar en [0, 1)")


@dataclass(frozen=True)
class TargetEstimate:
    target_id: int
    position: Tuple[float, float]
    representative_ranges: Tuple[float, float]
    rate_bpm: float
    n_pairs: int


@dataclass
class RunReport:
    targets: List[TargetEstimate]
    pair_grid: Dict[str, Any]
    config: Dict[str, Any]
    seed: int
    timing: Dict[str, float] = field(default_factory=dict)

    def to_dict(self, include_timing: bool = False) -> Dict[str, Any]:
        # El tiempo de pared queda fuera por defecto: el reporte debe ser reproducible byte a byte
        payload = {
            "seed": self.seed,
            "targets": [
                {
                    "target_id": t.target_id,
                    "x_m": t.position[0],
                    "y_m": t.position[1],
                    "r1_m": t.representative_ranges[0],
                    "r2_m": t.representative_ranges[1],
                    "rate_bpm": t.rate_bpm,
                    "n_pairs": t.n_pairs,
                }
                for t in self.targets
            ],
            "pair_grid": self.pair_grid,
            "config": self.config,
        }
        if include_timing:
            payload["timing"] = self.timing
        return payload
