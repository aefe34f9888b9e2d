# respirad/pipeline.py
# Orquestación simulate -> process -> eval.
# Las funciones cmd_* devuelven (payload, código de salida), igual que las *_logic de la app.

import glob
import logging
import os
import time
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

from .config_parser import parse_config
from .constants import CUBE_FILE_SUFFIX, EXIT_OK, EXIT_USAGE
from .dsp.association import (
    cluster_pairs,
    correlate_pairs,
    enumerate_candidates,
    resolve_targets,
    sets_from_clusters,
)
from .dsp.range_processing import candidate_bins, detect_range_bins, range_fft
from .dsp.scene_sim import synthesize_all
from .dsp.spectral_estimation import averaged_autocorrelation, rate_rmse, rate_spectrum
from .dsp.vital_extraction import build_resp_signals
from .errors import (
    ConfigSyntaxError,
    ConfigValueError,
    EvalMismatchError,
    NoAssociationsError,
    NoDetectionsError,
    RespiradError,
    StorageError,
)
from .models import (
    AssociationSet,
    AveragedAutocorrelation,
    Candidate,
    CorrelationFunction,
    DataCube,
    Detection,
    Geometry,
    PairResult,
    RangeTimeMap,
    RateSpectrum,
    RespSignal,
    RunConfig,
    RunReport,
    TargetEstimate,
)
from .storage.csv_export import (
    read_rates_csv,
    write_candidates_csv,
    write_json,
    write_pair_grid_csv,
    write_positions_csv,
    write_range_time_csv,
    write_resp_signals_csv,
    write_spectrum_csv,
    write_summary_csv,
)
from .storage.cube_file import read_cube, write_cube

logger = logging.getLogger(__name__)


@dataclass
class PipelineResult:
    maps: List[RangeTimeMap]
    detections: Dict[int, List[Detection]]
    signals: Dict[int, List[RespSignal]]
    pairs: List[PairResult]
    correlations: Dict[Tuple[int, int], CorrelationFunction]
    candidates: List[Candidate]
    targets: List[AssociationSet]
    autocorrelations: List[AveragedAutocorrelation]
    spectra: List[RateSpectrum]
    report: RunReport
    timing: Dict[str, float] = field(default_factory=dict)


# --- Configuración ---

def load_run_config(path: str, defaults: Optional[Dict[str, Any]] = None) -> RunConfig:
    try:
        with open(path, "r", encoding="utf-8-sig") as f:
            text = f.read()
    except UnicodeDecodeError as e:
        raise ConfigSyntaxError(f"el archivo {path} no es UTF-8 válido") from e
    except OSError as e:
        raise StorageError(f"no se pudo leer la configuración: {e.strerror}", path) from e
    return parse_config(text, defaults)


def config_echo(config: RunConfig) -> Dict[str, Any]:
    """Eco determinista de la configuración efectiva (sin output_dir)."""
    scene = config.scene
    wf = scene.waveform
    return {
        "waveform": {
            "f_start_hz": wf.f_start,
            "bandwidth_hz": wf.bandwidth,
            "chirp_duration_s": wf.chirp_duration,
            "chirps_per_frame": wf.chirps_per_frame,
            "n_frames": wf.n_frames,
            "fast_time_samples": wf.fast_time_samples,
            "adc_sample_rate_hz": wf.adc_sample_rate,
            "frame_period_s": wf.frame_interval,
        },
        "radars": [
            {"id": r.id, "x_m": r.position_x, "d_m": r.plane_offset_d, "start_offset_s": r.start_offset}
            for r in scene.radars
        ],
        "targets": [
            {
                "x_m": t.position[0], "y_m": t.position[1],
                "breath_hz": t.breath_frequency, "amplitude_m": t.breath_amplitude,
                "phase_rad": t.breath_phase, "reflectivity": t.reflectivity,
                "axis": list(t.vibration_axis),
            }
            for t in scene.targets
        ],
        "noise_snr_db": scene.noise_snr_db,
        "cfar": {
            "guard_cells": config.cfar.guard_cells,
            "training_cells": config.cfar.training_cells,
            "pfa": config.cfar.pfa,
        },
        "gamma_th": config.gamma_th,
        "max_lag_s": config.max_lag,
        "band_hz": list(config.band),
        "expansion": config.expansion,
        "window": config.window,
        "zero_pad_factor": config.zero_pad_factor,
        "profile_oversample": config.profile_oversample,
        "peak_tie_tolerance": config.peak_tie_tolerance,
    }


def processing_geometry(config: RunConfig, radar_ids: Sequence[int]) -> Tuple[Tuple[int, int], Geometry]:
    """Los dos radares de id más bajo forman la línea base; el resto se ignora."""
    ids = sorted(radar_ids)
    if len(ids) < 2:
        raise ConfigValueError(f"se necesitan cubos de al menos 2 radares (hay {len(ids)})")
    if len(ids) > 2:
        logger.warning(f"Se recibieron {len(ids)} radares; sólo se usan {ids[0]} y {ids[1]} para multilaterar.")
    first = config.scene.radar(ids[0])
    second = config.scene.radar(ids[1])
    if first.plane_offset_d != second.plane_offset_d:
        raise ConfigValueError(
            f"los radares {first.id} y {second.id} deben tener la misma d "
            f"({first.plane_offset_d:g} vs {second.plane_offset_d:g} m)"
        )
    geom = Geometry(a=first.position_x, b=second.position_x, d=first.plane_offset_d)
    return (first.id, second.id), geom


# --- Pipeline en memoria ---

def run_pipeline(cubes: Sequence[DataCube], config: RunConfig, workers: int = 1) -> PipelineResult:
    timing: Dict[str, float] = {}
    by_id = {cube.radar_id: cube for cube in cubes}
    (id1, id2), geom = processing_geometry(config, list(by_id))
    selected = [by_id[id1], by_id[id2]]

    t0 = time.perf_counter()
    maps = [range_fft(cube, config.window) for cube in selected]
    timing["range_fft_s"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    detections: Dict[int, List[Detection]] = {}
    signals: Dict[int, List[RespSignal]] = {}
    for cube, map in zip(selected, maps):
        dets = detect_range_bins(map, config.cfar, config.profile_oversample)
        if not dets:
            raise NoDetectionsError(f"el radar {map.radar_id} no tiene detecciones CFAR")
        detections[map.radar_id] = dets
        bins = candidate_bins(dets, config.expansion, map.n_range_bins)
        signals[map.radar_id] = build_resp_signals(map, bins, cube.waveform.center_frequency, config.band)
    timing["detection_s"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    pairs, correlations = correlate_pairs(
        signals[id1], signals[id2],
        gamma_th=config.gamma_th,
        max_lag=config.max_lag,
        tie_tolerance=config.peak_tie_tolerance,
        workers=workers,
    )
    sets = sets_from_clusters(cluster_pairs(pairs, maps[0].slow_rate))
    candidates = enumerate_candidates(
        geom,
        [d.range for d in detections[id1]],
        [d.range for d in detections[id2]],
    )
    timing["association_s"] = time.perf_counter() - t0
    if not sets:
        raise NoAssociationsError(f"ningún par supera gamma_th = {config.gamma_th} ({len(pairs)} pares)")

    resolved = resolve_targets(sets, geom)
    if not resolved:
        raise NoAssociationsError("todos los conjuntos asociados son geométricamente inviables")

    t0 = time.perf_counter()
    autocorrelations = [averaged_autocorrelation(s, correlations) for s in resolved]
    spectra = [rate_spectrum(a, config.band, config.zero_pad_factor) for a in autocorrelations]
    timing["spectral_s"] = time.perf_counter() - t0

    estimates = [
        TargetEstimate(
            target_id=s.target_id,
            position=s.position,
            representative_ranges=s.representative_ranges,
            rate_bpm=spectrum.rate_bpm,
            n_pairs=len(s.pairs),
        )
        for s, spectrum in zip(resolved, spectra)
    ]
    report = RunReport(
        targets=estimates,
        pair_grid={
            "radar_ids": [id1, id2],
            "bins": {str(rid): [s.bin_index for s in signals[rid]] for rid in (id1, id2)},
            "n_pairs": len(pairs),
            "n_accepted": sum(p.accepted for p in pairs),
            "accepted": [
                {"m": p.m, "k": p.k, "peak_lag_s": p.peak_lag, "peak_value": p.peak_value}
                for p in pairs if p.accepted
            ],
        },
        config=config_echo(config),
        seed=config.scene.rng_seed,
        timing=timing,
    )
    return PipelineResult(
        maps=maps,
        detections=detections,
        signals=signals,
        pairs=pairs,
        correlations=correlations,
        candidates=candidates,
        targets=resolved,
        autocorrelations=autocorrelations,
        spectra=spectra,
        report=report,
        timing=timing,
    )


# --- Persistencia ---

def _ensure_dir(path: str) -> str:
    try:
        os.makedirs(path, exist_ok=True)
    except OSError as e:
        raise StorageError(f"no se pudo crear el directorio de salida: {e.strerror}", path) from e
    if not os.access(path, os.W_OK):
        raise StorageError("el directorio de salida no es escribible", path)
    return path


def write_outputs(result: PipelineResult, out_dir: str, emit_intermediates: bool) -> List[str]:
    """Escritura secuencial de los artefactos de process."""
    _ensure_dir(out_dir)
    written = [
        write_summary_csv(result.report.targets, os.path.join(out_dir, "summary.csv")),
        write_positions_csv(result.targets, os.path.join(out_dir, "positions.csv")),
        write_json(result.report.to_dict(), os.path.join(out_dir, "report.json")),
        write_json(result.timing, os.path.join(out_dir, "timing.json")),
    ]
    if emit_intermediates:
        for map in result.maps:
            written.append(write_range_time_csv(map, os.path.join(out_dir, f"range_time_{map.radar_id}.csv")))
            written.append(write_resp_signals_csv(
                result.signals[map.radar_id], os.path.join(out_dir, f"resp_signals_{map.radar_id}.csv")
            ))
        written.append(write_pair_grid_csv(result.pairs, os.path.join(out_dir, "pair_grid.csv")))
        written.append(write_candidates_csv(result.candidates, os.path.join(out_dir, "candidates.csv")))
        for spectrum in result.spectra:
            written.append(write_spectrum_csv(
                spectrum, os.path.join(out_dir, f"spectrum_target_{spectrum.target_id}.csv")
            ))
    logger.info(f"{len(written)} archivos escritos en {out_dir}")
    return written


def cube_path(out_dir: str, radar_id: int) -> str:
    return os.path.join(out_dir, f"radar_{radar_id}{CUBE_FILE_SUFFIX}")


def load_cubes(in_dir: str) -> List[DataCube]:
    if not os.path.isdir(in_dir):
        raise StorageError("el directorio de entrada no existe", in_dir)
    paths = sorted(glob.glob(os.path.join(in_dir, f"radar_*{CUBE_FILE_SUFFIX}")))
    cubes = [read_cube(p) for p in paths]
    if len(cubes) < 2:
        raise StorageError(f"se necesitan al menos 2 cubos {CUBE_FILE_SUFFIX} y hay {len(cubes)}", in_dir)
    return cubes


# --- Comandos ---

def _error_payload(e: RespiradError) -> Tuple[Dict[str, Any], int]:
    logger.error(f"{type(e).__name__}: {e}")
    return {"error": str(e)}, e.exit_code


def _unexpected_payload(e: Exception) -> Tuple[Dict[str, Any], int]:
    logger.error(f"Error inesperado: {e}", exc_info=True)
    return {"error": f"error inesperado: {e}"}, EXIT_USAGE


def cmd_simulate(config: RunConfig, out_dir: Optional[str] = None, workers: int = 1) -> Tuple[Dict[str, Any], int]:
    out_dir = out_dir or config.output_dir
    logger.info(f"Simulando {len(config.scene.radars)} radares en {out_dir}")
    try:
        _ensure_dir(out_dir)
        cubes = synthesize_all(config.scene, workers)
        files = [os.path.basename(write_cube(cube, cube_path(out_dir, cube.radar_id))) for cube in cubes]
        manifest = {
            "files": files,
            "seed": config.scene.rng_seed,
            "radar_ids": [cube.radar_id for cube in cubes],
            "n_frames": config.scene.waveform.n_frames,
            "slow_rate_hz": config.scene.waveform.slow_rate,
        }
        write_json(manifest, os.path.join(out_dir, "manifest.json"))
        return manifest, EXIT_OK
    except RespiradError as e:
        return _error_payload(e)
    except Exception as e:
        return _unexpected_payload(e)


def cmd_process(
        in_dir: str,
        config: RunConfig,
        out_dir: Optional[str] = None,
        emit_intermediates: bool = False,
        workers: int = 1,
    ) -> Tuple[Dict[str, Any], int]:
    out_dir = out_dir or config.output_dir
    logger.info(f"Procesando cubos de {in_dir} -> {out_dir}")
    try:
        cubes = load_cubes(in_dir)
        result = run_pipeline(cubes, config, workers)
        write_outputs(result, out_dir, emit_intermediates or config.emit_intermediates)
        return result.report.to_dict(), EXIT_OK
    except RespiradError as e:
        return _error_payload(e)
    except Exception as e:
        return _unexpected_payload(e)


def cmd_run(
        config: RunConfig,
        out_dir: Optional[str] = None,
        emit_intermediates: bool = False,
        workers: int = 1,
    ) -> Tuple[Dict[str, Any], int]:
    out_dir = out_dir or config.output_dir
    manifest, code = cmd_simulate(config, out_dir, workers)
    if code != EXIT_OK:
        return manifest, code
    return cmd_process(out_dir, config, out_dir, emit_intermediates, workers)


def cmd_eval(estimates_path: str, reference_path: str) -> Tuple[Dict[str, Any], int]:
    try:
        estimates = read_rates_csv(estimates_path)
        references = read_rates_csv(reference_path)
        if set(estimates) != set(references):
            raise EvalMismatchError(
                f"ids distintos: estimaciones {sorted(estimates)} vs referencias {sorted(references)}"
            )
        if not estimates:
            raise EvalMismatchError("los archivos no contienen blancos")
        ids = sorted(estimates)
        rows = [
            {
                "target_id": i,
                "estimate_bpm": estimates[i],
                "reference_bpm": references[i],
                "error_bpm": estimates[i] - references[i],
            }
            for i in ids
        ]
        rmse = rate_rmse([estimates[i] for i in ids], [references[i] for i in ids])
        logger.info(f"RMSE sobre {len(ids)} blancos: {rmse:.3f} rpm")
        return {"targets": rows, "rmse_bpm": rmse}, EXIT_OK
    except RespiradError as e:
        return _error_payload(e)
    except Exception as e:
        return _unexpected_payload(e)
