# respirad/storage/csv_export.py
# Exportación de resultados a CSV/JSON. Todos los floats con 9 cifras significativas.

import csv
import json
import logging
from typing import Any, Dict, Iterable, List, Sequence

import numpy as np

from ..constants import CSV_FLOAT_FORMAT
from ..errors import StorageError
from ..models import (
    AssociationSet,
    Candidate,
    PairResult,
    RangeTimeMap,
    RateSpectrum,
    RespSignal,
    TargetEstimate,
)

logger = logging.getLogger(__name__)


def fmt(value: float) -> str:
    return format(float(value), CSV_FLOAT_FORMAT)


def _write_rows(path: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    try:
        with open(path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(rows)
    except OSError as e:
        raise StorageError(f"no se pudo escribir el CSV: {e.strerror}", path) from e
    logger.debug(f"CSV escrito: {path}")
    return path


def write_json(payload: Dict[str, Any], path: str) -> str:
    try:
        with open(path, "w", encoding="utf-8") as f:
            f.write(json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False))
            f.write("\n")
    except OSError as e:
        raise StorageError(f"no se pudo escribir el JSON: {e.strerror}", path) from e
    return path


def write_range_time_csv(map: RangeTimeMap, path: str) -> str:
    """Filas = tramas lentas, columnas = bins; la cabecera lleva el rango de cada bin en metros."""
    magnitude = np.abs(map.values)
    header = [fmt(r) for r in map.ranges]
    return _write_rows(path, header, ([fmt(v) for v in row] for row in magnitude))


def write_resp_signals_csv(signals: Sequence[RespSignal], path: str) -> str:
    if not signals:
        return _write_rows(path, ["time_s"], [])
    times = signals[0].times
    header = ["time_s"] + [f"{fmt(s.range)}m" for s in signals]
    columns = [s.displacement for s in signals]
    rows = ([fmt(t)] + [fmt(col[i]) for col in columns] for i, t in enumerate(times))
    return _write_rows(path, header, rows)


def write_pair_grid_csv(pairs: Sequence[PairResult], path: str) -> str:
    header = ["m", "k", "range1_m", "range2_m", "peak_lag_s", "peak_value", "accepted"]
    rows = (
        [p.m, p.k, fmt(p.range1), fmt(p.range2), fmt(p.peak_lag), fmt(p.peak_value), int(p.accepted)]
        for p in pairs
    )
    return _write_rows(path, header, rows)


def write_positions_csv(sets: Sequence[AssociationSet], path: str) -> str:
    header = ["target_id", "x_m", "y_m", "r1_m", "r2_m"]
    rows = (
        [s.target_id, fmt(s.position[0]), fmt(s.position[1]),
         fmt(s.representative_ranges[0]), fmt(s.representative_ranges[1])]
        for s in sets if s.position is not None
    )
    return _write_rows(path, header, rows)


def write_candidates_csv(candidates: Sequence[Candidate], path: str) -> str:
    header = ["r1_m", "r2_m", "x_m", "y_m", "feasible", "reason"]
    rows = []
    for c in candidates:
        x, y = (fmt(c.position[0]), fmt(c.position[1])) if c.feasible else ("", "")
        rows.append([fmt(c.ranges[0]), fmt(c.ranges[1]), x, y, int(c.feasible), c.reason or ""])
    return _write_rows(path, header, rows)


def write_spectrum_csv(spectrum: RateSpectrum, path: str) -> str:
    header = ["frequency_hz", "bpm", "power"]
    rows = (
        [fmt(f), fmt(60.0 * f), fmt(p)]
        for f, p in zip(spectrum.frequencies, spectrum.power)
    )
    return _write_rows(path, header, rows)


def write_summary_csv(targets: Sequence[TargetEstimate], path: str) -> str:
    header = ["target_id", "rate_bpm", "n_pairs", "x_m", "y_m"]
    rows = (
        [t.target_id, fmt(t.rate_bpm), t.n_pairs, fmt(t.position[0]), fmt(t.position[1])]
        for t in targets
    )
    return _write_rows(path, header, rows)


def read_rates_csv(path: str) -> Dict[int, float]:
    """Lee un CSV con columnas target_id y rate_bpm (p.ej. summary.csv) -> {target_id: rpm}."""
    try:
        with open(path, newline="", encoding="utf-8-sig") as f:
            rows: List[Dict[str, str]] = list(csv.DictReader(f))
    except OSError as e:
        raise StorageError(f"no se pudo leer el CSV: {e.strerror}", path) from e

    rates: Dict[int, float] = {}
    for line, row in enumerate(rows, start=2):
        try:
            target_id = int(row["target_id"])
            rate = float(row["rate_bpm"])
        except (KeyError, TypeError, ValueError) as e:
            raise StorageError(f"fila {line} inválida (se esperan target_id y rate_bpm): {e}", path) from e
        if target_id in rates:
            raise StorageError(f"target_id {target_id} repetido en la fila {line}", path)
        rates[target_id] = rate
    return rates
