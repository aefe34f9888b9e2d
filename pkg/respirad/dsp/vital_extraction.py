# respirad/dsp/vital_extraction.py
# Fase lenta por bin -> desplazamiento -> banda de respiración.

import logging
import math
from typing import List, Sequence, Tuple

import numpy as np
from scipy.signal import butter, detrend, sosfiltfilt

from ..constants import BANDPASS_ORDER, DEFAULT_BAND_HZ, SPEED_OF_LIGHT
from ..errors import ConfigValueError, ProcessingError
from ..models import RangeTimeMap, RespSignal

logger = logging.getLogger(__name__)


def extract_phase(map: RangeTimeMap, bin: int) -> np.ndarray:
    """Fase desenvuelta de values[:, bin] a lo largo del tiempo lento (rad)."""
    if not 0 <= bin < map.n_range_bins:
        raise IndexError(f"bin {bin} fuera del mapa (0..{map.n_range_bins - 1})")
    # angle devuelve (-pi, pi]; unwrap quita los saltos de 2 pi entre tramas
    return np.unwrap(np.angle(map.values[:, bin]))


def phase_to_displacement(phase: np.ndarray, f_c: float) -> np.ndarray:
    """Desplazamiento = fase * c / (4 pi f_c), sin media ni tendencia lineal."""
    if f_c <= 0:
        raise ConfigValueError(f"f_c debe ser > 0 (recibido {f_c})")
    displacement = np.asarray(phase, dtype=float) * SPEED_OF_LIGHT / (4.0 * np.pi * f_c)
    return detrend(displacement, type="linear")


def min_bandpass_length(slow_rate: float, band: Tuple[float, float] = DEFAULT_BAND_HZ) -> int:
    """Un periodo del borde inferior de la banda, en muestras."""
    return int(math.ceil(slow_rate / band[0]))


def bandpass_respiration(
        signal: np.ndarray,
        slow_rate: float,
        band: Tuple[float, float] = DEFAULT_BAND_HZ,
        order: int = BANDPASS_ORDER,
    ) -> np.ndarray:
    """Butterworth pasa-banda de fase cero (ida y vuelta) sobre [band[0], band[1]] Hz."""
    lo, hi = band
    if not 0 < lo < hi:
        raise ConfigValueError(f"banda inválida {band}")
    if slow_rate <= 2.0 * hi:
        raise ConfigValueError(f"slow_rate {slow_rate:g} Hz debe superar 2 x {hi:g} Hz")

    signal = np.asarray(signal, dtype=float)
    min_length = min_bandpass_length(slow_rate, band)
    if signal.size < min_length:
        raise ProcessingError(
            f"serie de {signal.size} muestras demasiado corta para el filtro (mínimo {min_length})"
        )

    # secciones de segundo orden; filtfilt duplica el orden efectivo
    sos = butter(order, [lo, hi], btype="bandpass", fs=slow_rate, output="sos")
    return sosfiltfilt(sos, signal, padlen=min(min_length, signal.size - 1))


def build_resp_signals(
        map: RangeTimeMap,
        bins: Sequence[int],
        f_c: float,
        band: Tuple[float, float] = DEFAULT_BAND_HZ,
    ) -> List[RespSignal]:
    signals = []
    for b in bins:
        # 1. Fase desenvuelta del bin -> desplazamiento en metros
        displacement = phase_to_displacement(extract_phase(map, b), f_c)
        # 2. Quedarse sólo con la banda de respiración
        filtered = bandpass_respiration(displacement, map.slow_rate, band)
        # 3. Empaquetar con el rango nativo del bin
        signals.append(RespSignal(
            radar_id=map.radar_id,
            bin_index=int(b),
            range=float(b * map.bin_spacing),
            displacement=filtered,
            slow_rate=map.slow_rate,
            start_offset=map.start_offset,
        ))
    logger.debug(f"Radar {map.radar_id}: {len(signals)} señales de respiración en bins {list(bins)}")
    return signals
