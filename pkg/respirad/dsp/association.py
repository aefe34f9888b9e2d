# respirad/dsp/association.py
# Correlación cruzada entre radares, supresión de fantasmas y multilateración.

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from typing import Dict, List, Sequence, Tuple

import numpy as np
from scipy.signal import find_peaks

from ..constants import (
    CLUSTER_LAG_TOLERANCE_SAMPLES,
    DEFAULT_GAMMA_TH,
    DEFAULT_MAX_LAG_S,
    DEFAULT_PEAK_TIE_TOLERANCE,
)
from ..errors import ConfigValueError, DegenerateSignalError, InfeasiblePairingError, ProcessingError
from ..models import AssociationSet, Candidate, CorrelationFunction, Geometry, PairResult, RespSignal

logger = logging.getLogger(__name__)

PairKey = Tuple[int, int]


# --- Correlación ---

def normalized_xcorr(x: RespSignal, y: RespSignal, max_lag: float) -> CorrelationFunction:
    """
    Coeficiente de Pearson entre los tramos solapados de x e y para cada retardo entero
    dentro de ±max_lag. Retardo positivo: y va retrasada respecto a x.
    """
    if not math.isclose(x.slow_rate, y.slow_rate, rel_tol=1e-12):
        raise ProcessingError(f"tasas lentas distintas: {x.slow_rate:g} Hz vs {y.slow_rate:g} Hz")
    a = np.asarray(x.displacement, dtype=float)
    b = np.asarray(y.displacement, dtype=float)
    rate = x.slow_rate

    duration = min(a.size, b.size) / rate
    if not 0 < max_lag < duration / 2:
        raise ProcessingError(f"max_lag {max_lag:g} s debe estar en (0, {duration / 2:g}) s")
    if np.std(a) == 0 or np.std(b) == 0:
        raise DegenerateSignalError(
            f"señal de varianza cero en el par (bin {x.bin_index}, bin {y.bin_index})"
        )

    n_lags = int(math.floor(max_lag * rate + 1e-9))
    lags = np.arange(-n_lags, n_lags + 1)
    values = np.zeros(lags.size)
    for idx, lag in enumerate(lags):
        # sólo el tramo solapado; cada retardo se normaliza con sus propias medias
        start = max(0, -lag)
        stop = min(a.size, b.size - lag)
        seg_a = a[start:stop]
        seg_b = b[start + lag:stop + lag]
        ca = seg_a - seg_a.mean()
        cb = seg_b - seg_b.mean()
        denom = math.sqrt(np.dot(ca, ca) * np.dot(cb, cb))
        values[idx] = np.dot(ca, cb) / denom if denom > 0 else 0.0

    return CorrelationFunction(
        lags=lags / rate,
        values=np.clip(values, -1.0, 1.0),
        pair=(x.bin_index, y.bin_index),
    )


def peak_lag(corr: CorrelationFunction, tie_tolerance: float = DEFAULT_PEAK_TIE_TOLERANCE) -> Tuple[float, float]:
    """
    Retardo del máximo de |R|. Empates: menor |retardo| y, a igualdad, el retardo negativo.

    Cuentan como empate los valores iguales al máximo y los picos locales de |R| a menos de
    `tie_tolerance` (relativo) de él. Con tie_tolerance = 0 el criterio es argmax |R| estricto.
    El signo del pico no interviene: un pico negativo dominante gana igual que uno positivo.
    """
    if corr.values.size == 0:
        raise ProcessingError("función de correlación vacía")
    if not 0.0 <= tie_tolerance < 1.0:
        raise ConfigValueError(f"peak_tie_tolerance debe estar en [0, 1) (recibido {tie_tolerance})")
    mag = np.abs(corr.values)
    top = mag.max()

    # Respiración casi sinusoidal: las réplicas a +-medio periodo igualan |R| salvo error sub-muestra
    peaks, _ = find_peaks(mag, height=(1.0 - tie_tolerance) * top)
    eligible = np.union1d(peaks, np.flatnonzero(mag == top))

    best = min(eligible, key=lambda i: (abs(corr.lags[i]), corr.lags[i]))
    return float(corr.lags[best]), float(corr.values[best])


def correlate_pairs(
        signals_r1: Sequence[RespSignal],
        signals_r2: Sequence[RespSignal],
        gamma_th: float = DEFAULT_GAMMA_TH,
        max_lag: float = DEFAULT_MAX_LAG_S,
        tie_tolerance: float = DEFAULT_PEAK_TIE_TOLERANCE,
        workers: int = 1,
    ) -> Tuple[List[PairResult], Dict[PairKey, CorrelationFunction]]:
    """Rejilla completa |bins1| x |bins2|: resultados por par (orden m, k) y almacén de correlaciones."""
    grid = [(s1, s2) for s1 in signals_r1 for s2 in signals_r2]

    def _one(pair):
        return normalized_xcorr(pair[0], pair[1], max_lag)

    if workers > 1 and len(grid) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            correlations = list(pool.map(_one, grid))
    else:
        correlations = [_one(pair) for pair in grid]

    # el almacén guarda todas las correlaciones, aceptadas o no, para la estimación espectral
    results = []
    store: Dict[PairKey, CorrelationFunction] = {}
    for (s1, s2), corr in zip(grid, correlations):
        lag, value = peak_lag(corr, tie_tolerance)
        accepted = abs(value) > gamma_th
        results.append(PairResult(
            m=s1.bin_index, k=s2.bin_index,
            range1=s1.range, range2=s2.range,
            peak_lag=lag, peak_value=value,
            accepted=accepted,
        ))
        store[(s1.bin_index, s2.bin_index)] = corr
        logger.debug(
            f"Par ({s1.bin_index}, {s2.bin_index}): pico {value:+.3f} en {lag:+.4f} s "
            f"-> {'aceptado' if accepted else 'rechazado'}"
        )
    return results, store


# --- Agrupamiento ---

def cluster_pairs(
        pairs: Sequence[PairResult],
        slow_rate: float,
        lag_tolerance_samples: int = CLUSTER_LAG_TOLERANCE_SAMPLES,
    ) -> List[List[PairResult]]:
    """
    Agrupa los pares aceptados de forma voraz por |pico| descendente (desempate por (m, k)).
    Un par entra en el primer grupo con el que comparte bin y cuya mediana de retardos está a
    <= lag_tolerance_samples muestras; si no, abre un grupo nuevo.
    """
    accepted = sorted(
        (p for p in pairs if p.accepted),
        key=lambda p: (-abs(p.peak_value), p.m, p.k),
    )
    tolerance = lag_tolerance_samples / slow_rate + 1e-12
    clusters: List[List[PairResult]] = []
    for pair in accepted:
        for cluster in clusters:
            # mismo sujeto: comparte un bin y el retardo es coherente con el grupo
            shares_bin = any(p.m == pair.m or p.k == pair.k for p in cluster)
            median_lag = float(np.median([p.peak_lag for p in cluster]))
            if shares_bin and abs(pair.peak_lag - median_lag) <= tolerance:
                cluster.append(pair)
                break
        else:
            clusters.append([pair])
    return clusters


def sets_from_clusters(clusters: Sequence[Sequence[PairResult]]) -> List[AssociationSet]:
    sets = []
    for j, cluster in enumerate(clusters, start=1):
        # rango representativo: media ponderada por |pico|
        weights = np.array([abs(p.peak_value) for p in cluster])
        r1 = float(np.average([p.range1 for p in cluster], weights=weights))
        r2 = float(np.average([p.range2 for p in cluster], weights=weights))
        sets.append(AssociationSet(target_id=j, pairs=tuple(cluster), representative_ranges=(r1, r2)))
    return sets


def associate(
        signals_r1: Sequence[RespSignal],
        signals_r2: Sequence[RespSignal],
        gamma_th: float = DEFAULT_GAMMA_TH,
        max_lag: float = DEFAULT_MAX_LAG_S,
        tie_tolerance: float = DEFAULT_PEAK_TIE_TOLERANCE,
    ) -> List[AssociationSet]:
    if not signals_r1 or not signals_r2:
        raise ProcessingError("associate necesita al menos una señal por radar")
    if not 0 < gamma_th < 1:
        raise ConfigValueError(f"gamma_th debe estar en (0, 1) (recibido {gamma_th})")

    pairs, _ = correlate_pairs(signals_r1, signals_r2, gamma_th, max_lag, tie_tolerance)
    sets = sets_from_clusters(cluster_pairs(pairs, signals_r1[0].slow_rate))
    logger.info(
        f"{sum(p.accepted for p in pairs)} de {len(pairs)} pares aceptados (gamma_th={gamma_th}); "
        f"{len(sets)} conjuntos"
    )
    return sets


# --- Multilateración ---

def multilaterate(geom: Geometry, r1: float, r2: float) -> Tuple[float, float]:
    """Corte de los dos círculos de rango, rama y > 0 (sujetos delante de la línea de radares)."""
    a, b, d = geom.a, geom.b, geom.d
    # la altura d resta a ambos rangos por igual: sólo cuenta la proyección en el plano
    if r1 <= d or r2 <= d:
        raise InfeasiblePairingError(f"rangos ({r1:g}, {r2:g}) m no superan la altura d = {d:g} m")
    # resta de las dos ecuaciones de círculo: x queda lineal
    x = (r1 ** 2 - r2 ** 2 + b ** 2 - a ** 2) / (2.0 * (b - a))
    radicand = r1 ** 2 - d ** 2 - (x - a) ** 2
    if radicand < 0:
        raise InfeasiblePairingError(
            f"los rangos ({r1:g}, {r2:g}) m no se cortan (radicando {radicand:.4g})"
        )
    return float(x), float(math.sqrt(radicand))


def enumerate_candidates(geom: Geometry, ranges_r1: Sequence[float], ranges_r2: Sequence[float]) -> List[Candidate]:
    """Producto cartesiano de rangos; los emparejamientos imposibles se marcan, no se descartan."""
    if len(ranges_r1) == 0 or len(ranges_r2) == 0:
        raise ProcessingError("enumerate_candidates necesita al menos un rango por radar")
    candidates = []
    for r1 in ranges_r1:
        for r2 in ranges_r2:
            try:
                candidates.append(Candidate(ranges=(float(r1), float(r2)), position=multilaterate(geom, r1, r2)))
            except InfeasiblePairingError as e:
                candidates.append(Candidate(ranges=(float(r1), float(r2)), position=None, reason=str(e)))
    return candidates


def resolve_targets(associations: Sequence[AssociationSet], geom: Geometry) -> List[AssociationSet]:
    resolved = []
    for assoc in associations:
        r1, r2 = assoc.representative_ranges
        try:
            position = multilaterate(geom, r1, r2)
        except InfeasiblePairingError as e:
            logger.warning(f"Conjunto C_{assoc.target_id} descartado: {e}")
            continue
        resolved.append(replace(assoc, position=position))
        logger.info(
            f"Blanco {assoc.target_id}: ({position[0]:.3f}, {position[1]:.3f}) m "
            f"con {len(assoc.pairs)} pares"
        )
    return resolved
