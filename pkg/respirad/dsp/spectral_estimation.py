# respirad/dsp/spectral_estimation.py
# Promedio de correlaciones compensadas en retardo y tasa respiratoria por sujeto.

import logging
import math
from typing import Dict, Sequence, Tuple

import numpy as np
from scipy.signal import get_window

from ..constants import DEFAULT_BAND_HZ, DEFAULT_ZERO_PAD_FACTOR
from ..errors import ConfigValueError, DegenerateSignalError, ProcessingError
from ..models import AssociationSet, AveragedAutocorrelation, CorrelationFunction, RateSpectrum

logger = logging.getLogger(__name__)


def averaged_autocorrelation(
        assoc: AssociationSet,
        corr_store: Dict[Tuple[int, int], CorrelationFunction],
    ) -> AveragedAutocorrelation:
    """
    r(tau) = media sobre C_j de R_mk(tau + lag_mk) / R_mk(lag_mk).
    Sólo se conservan los retardos presentes en todos los soportes desplazados.
    """
    if not assoc.pairs:
        raise ProcessingError(f"C_{assoc.target_id} vacío")

    shifted = []
    for pair in assoc.pairs:
        corr = corr_store.get((pair.m, pair.k))
        if corr is None:
            raise ProcessingError(f"no hay correlación almacenada para el par ({pair.m}, {pair.k})")
        peak_index = int(np.argmin(np.abs(corr.lags - pair.peak_lag)))
        peak_value = corr.values[peak_index]
        if peak_value == 0:
            raise DegenerateSignalError(f"pico nulo en el par ({pair.m}, {pair.k})")
        shifted.append((corr, peak_index, peak_value))

    # Todas las correlaciones comparten rejilla: 2*half + 1 retardos con paso 1/slow_rate
    half = (shifted[0][0].values.size - 1) // 2
    first = shifted[0][0].lags
    lag_step = first[1] - first[0] if first.size > 1 else 0.0
    offsets = [peak_index - half for _, peak_index, _ in shifted]
    # soporte común tras re-centrar cada término en su pico
    lo = -half - min(offsets)
    hi = half - max(offsets)

    steps = np.arange(lo, hi + 1)
    total = np.zeros(steps.size)
    for corr, peak_index, peak_value in shifted:
        # dividir por el valor del pico (con su signo) deja r(0) = 1 también en contrafase
        total += corr.values[peak_index + steps] / peak_value
    values = total / len(shifted)

    # el eje sale del índice de paso, no de la rejilla original
    lags = steps * lag_step
    return AveragedAutocorrelation(
        target_id=assoc.target_id,
        lags=lags,
        values=values,
        n_pairs=len(shifted),
    )


def rate_spectrum(
        acorr: AveragedAutocorrelation,
        band: Tuple[float, float] = DEFAULT_BAND_HZ,
        zero_pad_factor: int = DEFAULT_ZERO_PAD_FACTOR,
    ) -> RateSpectrum:
    """Hann + relleno de ceros + |DFT|; espectro en banda normalizado a máximo 1."""
    if acorr.lags.size < 2:
        raise ProcessingError(f"r(tau) del blanco {acorr.target_id} tiene menos de 2 retardos")
    if zero_pad_factor < 1:
        raise ConfigValueError(f"zero_pad_factor debe ser >= 1 (recibido {zero_pad_factor})")

    rate = 1.0 / (acorr.lags[1] - acorr.lags[0])
    lo, hi = band
    if not 0 < lo < hi < rate / 2:
        raise ConfigValueError(f"banda {band} fuera de (0, {rate / 2:g}) Hz")

    n = acorr.values.size
    window = get_window("hann", n, fftbins=False)
    nfft = n * zero_pad_factor
    spectrum = np.abs(np.fft.rfft(acorr.values * window, n=nfft))
    freqs = np.fft.rfftfreq(nfft, d=1.0 / rate)

    in_band = (freqs >= lo) & (freqs <= hi)
    if not np.any(in_band):
        raise ProcessingError(f"ningún bin de frecuencia cae en la banda {band} (rejilla {rate / nfft:.4g} Hz)")
    freqs = freqs[in_band]
    power = spectrum[in_band]
    peak = power.max()
    if peak == 0:
        raise DegenerateSignalError(f"espectro nulo en banda para el blanco {acorr.target_id}")
    power = power / peak

    rate_bpm = 60.0 * float(freqs[int(np.argmax(power))])
    logger.info(f"Blanco {acorr.target_id}: {rate_bpm:.2f} rpm ({acorr.n_pairs} pares promediados)")
    return RateSpectrum(
        target_id=acorr.target_id,
        frequencies=freqs,
        power=power,
        rate_bpm=rate_bpm,
        band=(lo, hi),
    )


def rate_rmse(estimates: Sequence[float], references: Sequence[float]) -> float:
    """Raíz del error cuadrático medio, en rpm."""
    if len(estimates) != len(references):
        raise ProcessingError(f"longitudes distintas: {len(estimates)} estimaciones, {len(references)} referencias")
    if len(estimates) == 0:
        raise ProcessingError("rate_rmse necesita al menos un par")
    diff = np.asarray(estimates, dtype=float) - np.asarray(references, dtype=float)
    return math.sqrt(float(np.mean(diff ** 2)))
