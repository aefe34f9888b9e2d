# respirad/dsp/range_processing.py
# Range-FFT por trama y detección CA-CFAR de los bins ocupados.

import logging
from typing import Dict, List, Optional

import numpy as np
from scipy.signal import get_window

from ..constants import DEFAULT_PROFILE_OVERSAMPLE, DEFAULT_WINDOW, SUPPORTED_WINDOWS, WINDOW_RECTANGULAR
from ..errors import ConfigValueError
from ..models import CfarParams, DataCube, Detection, RangeTimeMap

logger = logging.getLogger(__name__)


def fast_time_window(name: str, length: int) -> np.ndarray:
    if name not in SUPPORTED_WINDOWS:
        raise ConfigValueError(f"ventana '{name}' no soportada {SUPPORTED_WINDOWS}")
    if name == WINDOW_RECTANGULAR:
        return np.ones(length)
    return get_window(name, length)


def range_fft(cube: DataCube, window: str = DEFAULT_WINDOW) -> RangeTimeMap:
    """
    Un perfil de rango por trama: media coherente de los chirps, ventana en tiempo rápido y DFT.
    El espectro se normaliza por la suma de la ventana (un tono de amplitud sigma da |X| = sigma).
    """
    waveform = cube.waveform
    # media acumulada en complex128 aunque el cubo venga en complex64
    integrated = cube.samples.mean(axis=1, dtype=np.complex128)  # [trama][muestra rápida]
    w = fast_time_window(window, waveform.fast_time_samples)
    values = np.fft.fft(integrated * w, axis=1) / w.sum()
    return RangeTimeMap(
        radar_id=cube.radar_id,
        values=values,
        bin_spacing=waveform.bin_spacing,
        slow_rate=waveform.slow_rate,
        start_offset=cube.start_offset,
        window=window,
    )


def mean_profile(map: RangeTimeMap) -> np.ndarray:
    if map.n_frames < 1:
        raise ConfigValueError("el mapa rango-tiempo no tiene tramas")
    return np.abs(map.values).mean(axis=0)


def oversampled_profile(map: RangeTimeMap, factor: int = DEFAULT_PROFILE_OVERSAMPLE) -> np.ndarray:
    """
    Perfil medio sobre la rejilla de rango interpolada x`factor`.
    Se reconstruye el tiempo rápido con la IFFT y se rellena con ceros; las muestras k*factor
    coinciden con el perfil nativo.
    """
    if factor < 1:
        raise ConfigValueError(f"el factor de sobremuestreo debe ser >= 1 (recibido {factor})")
    if factor == 1:
        return mean_profile(map)
    n = map.n_range_bins
    fast_time = np.fft.ifft(map.values, axis=1)
    fine = np.fft.fft(fast_time, n=n * factor, axis=1)
    return np.abs(fine).mean(axis=0)


def cfar_alpha(training_cells: int, pfa: float) -> float:
    """Factor CA-CFAR para N celdas de entrenamiento: N * (pfa^(-1/N) - 1)."""
    n = 2 * training_cells
    return n * (pfa ** (-1.0 / n) - 1.0)


def _training_mean(profile: np.ndarray, guard: int, train: int) -> np.ndarray:
    # Celdas tratadas de forma circular: el perfil de rango es una DFT
    pad = guard + train
    kernel = np.ones(2 * pad + 1)
    kernel[train:train + 2 * guard + 1] = 0.0
    kernel /= kernel.sum()
    padded = np.concatenate((profile[-pad:], profile, profile[:pad]))
    return np.correlate(padded, kernel, mode="valid")


def cfar_detect(
        profile: np.ndarray,
        params: CfarParams,
        bin_spacing: float = 1.0,
        oversample: int = 1,
    ) -> List[Detection]:
    """
    CA-CFAR sobre un perfil real. Con `oversample` > 1 las celdas de guarda y entrenamiento se
    escalan por el factor y alpha se calcula con el número nativo de celdas de entrenamiento.
    Devuelve sólo máximos locales por encima del umbral, ordenados por bin.
    """
    profile = np.asarray(profile, dtype=float)
    guard = params.guard_cells * oversample
    train = params.training_cells * oversample
    min_length = 2 * (guard + train) + 1
    if profile.size <= min_length:
        raise ConfigValueError(
            f"perfil de {profile.size} celdas demasiado corto para CFAR (se necesitan > {min_length})"
        )

    # 1. Nivel de ruido local y umbral adaptativo
    noise = _training_mean(profile, guard, train)
    threshold = cfar_alpha(params.training_cells, params.pfa) * noise

    # 2. Máximos locales (circulares) sobre el umbral
    left = np.roll(profile, 1)
    right = np.roll(profile, -1)
    is_peak = (profile >= left) & (profile > right) & (profile > threshold)

    # 3. SNR estimada frente al ruido local
    detections = []
    floor = np.finfo(float).tiny
    for i in np.flatnonzero(is_peak):
        snr_db = 10.0 * np.log10(profile[i] / max(noise[i], floor))
        detections.append(Detection(bin_index=int(i), range=float(i * bin_spacing), snr_estimate=float(snr_db)))
    return detections


def _parabolic_offset(profile: np.ndarray, i: int) -> float:
    a = profile[(i - 1) % profile.size]
    b = profile[i]
    c = profile[(i + 1) % profile.size]
    denom = a - 2.0 * b + c
    if denom == 0:
        return 0.0
    return float(np.clip(0.5 * (a - c) / denom, -0.5, 0.5))


def detect_range_bins(
        map: RangeTimeMap,
        params: CfarParams,
        oversample: int = DEFAULT_PROFILE_OVERSAMPLE,
    ) -> List[Detection]:
    """
    Detector del pipeline: CFAR sobre el perfil sobremuestreado, refinamiento parabólico del
    pico y redondeo al bin nativo. Permite detectar dos blancos en bins contiguos.
    """
    profile = oversampled_profile(map, oversample)
    fine = cfar_detect(profile, params, bin_spacing=map.bin_spacing / oversample, oversample=oversample)

    by_bin: Dict[int, Detection] = {}
    for det in fine:
        # posición sub-celda en la rejilla fina, luego al bin nativo más cercano
        position = det.bin_index + _parabolic_offset(profile, det.bin_index)
        native = int(round(position / oversample)) % map.n_range_bins
        # dos picos finos en el mismo bin nativo: gana el de más SNR
        current = by_bin.get(native)
        if current is None or det.snr_estimate > current.snr_estimate:
            by_bin[native] = Detection(
                bin_index=native,
                range=float(native * map.bin_spacing),
                snr_estimate=det.snr_estimate,
            )
        logger.debug(
            f"Radar {map.radar_id}: pico CFAR en bin fino {position:.3f} -> bin {native} "
            f"({det.snr_estimate:.1f} dB)"
        )

    detections = [by_bin[b] for b in sorted(by_bin)]
    logger.info(
        f"Radar {map.radar_id}: {len(detections)} bins detectados "
        f"{[d.bin_index for d in detections]}"
    )
    return detections


def candidate_bins(detections: List[Detection], expansion: int, n_bins: Optional[int] = None) -> List[int]:
    """Unión de bin ± expansion de cada detección, recortada al mapa y ordenada."""
    if expansion < 0:
        raise ConfigValueError(f"expansion debe ser >= 0 (recibido {expansion})")
    bins = set()
    for det in detections:
        for b in range(det.bin_index - expansion, det.bin_index + expansion + 1):
            if b < 0 or (n_bins is not None and b >= n_bins):
                continue
            bins.add(b)
    return sorted(bins)
