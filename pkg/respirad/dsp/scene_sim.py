# respirad/dsp/scene_sim.py
# Geometría de la escena y síntesis de la señal IF cruda por radar.

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from typing import List, Union

import numpy as np

from ..constants import SPEED_OF_LIGHT, SYNTH_BLOCK_SAMPLES
from ..errors import ConfigValueError, ProcessingError
from ..models import DataCube, RadarUnit, SceneConfig, TargetModel, WaveformConfig

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]


def range_resolution(waveform: WaveformConfig) -> float:
    """Resolución en rango c / (2B). 1500 MHz -> 0.0999 m."""
    if waveform.bandwidth <= 0:
        raise ConfigValueError(f"bandwidth debe ser > 0 (recibido {waveform.bandwidth})")
    return SPEED_OF_LIGHT / (2.0 * waveform.bandwidth)


def target_position(target: TargetModel, t: ArrayLike):
    """Posición (x, y) del centro de dispersión en el instante t (el pecho se mueve sobre vibration_axis)."""
    t = np.asarray(t, dtype=float)
    excursion = target.breath_amplitude * np.sin(
        2.0 * np.pi * target.breath_frequency * t + target.breath_phase
    )
    x = target.position[0] + excursion * target.vibration_axis[0]
    y = target.position[1] + excursion * target.vibration_axis[1]
    return x, y


def instantaneous_range(radar: RadarUnit, target: TargetModel, t: ArrayLike) -> ArrayLike:
    """
    Distancia radar-blanco en el instante t (escalar o array).
    r(t) = sqrt((x(t) - a)^2 + y(t)^2 + d^2), con el radar en (a, 0) a una altura d del plano.
    """
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise ProcessingError("instantaneous_range requiere t >= 0")
    x, y = target_position(target, t_arr)
    r = np.sqrt((x - radar.position_x) ** 2 + y ** 2 + radar.plane_offset_d ** 2)
    return float(r) if np.ndim(r) == 0 else r


def slow_time_grid(waveform: WaveformConfig, start_offset: float = 0.0) -> np.ndarray:
    """Instante de inicio de cada chirp, forma [trama][chirp]."""
    frames = np.arange(waveform.n_frames)[:, None] * waveform.frame_interval
    chirps = np.arange(waveform.chirps_per_frame)[None, :] * waveform.chirp_duration
    return start_offset + frames + chirps


def noise_variance(scene: SceneConfig) -> float:
    """Varianza compleja del ruido para que la SNR por muestra del blanco más fuerte sea noise_snr_db."""
    reference = max((abs(t.reflectivity) for t in scene.targets), default=1.0)
    return reference ** 2 / 10.0 ** (scene.noise_snr_db / 10.0)


def frames_per_block(waveform: WaveformConfig, block_samples: int = SYNTH_BLOCK_SAMPLES) -> int:
    """Tramas que caben en un bloque de síntesis (al menos una)."""
    per_frame = waveform.chirps_per_frame * waveform.fast_time_samples
    return max(1, block_samples // per_frame)


def synthesize_if_cube(scene: SceneConfig, radar_id: int, block_samples: int = SYNTH_BLOCK_SAMPLES) -> DataCube:
    """
    Cubo IF complejo [trama][chirp][muestra] del radar `radar_id`.

    Se sintetiza por bloques de tramas sobre el cubo ya reservado (complex64, como el archivo
    MSRC): la memoria extra es la de un bloque, no la del cubo entero.
    """
    radar = scene.radar(radar_id)
    waveform = scene.waveform

    tau = slow_time_grid(waveform, radar.start_offset)
    t_fast = np.arange(waveform.fast_time_samples) / waveform.adc_sample_rate
    # Fase IF = 4*pi*r/c * (gamma*t_n + f_c); la fase residual se omite
    fast_term = waveform.slope * t_fast + waveform.center_frequency
    k = 4.0 * np.pi / SPEED_OF_LIGHT

    rng = None
    if scene.noise_snr_db is not None:
        rng = np.random.default_rng(scene.rng_seed ^ radar_id)
        sigma = np.sqrt(noise_variance(scene) / 2.0)

    samples = np.zeros(tau.shape + (waveform.fast_time_samples,), dtype=np.complex64)
    step = frames_per_block(waveform, block_samples)
    for start in range(0, waveform.n_frames, step):
        block = samples[start:start + step]
        for target in scene.targets:
            # la fase se calcula en float64 (miles de rad) y sólo el fasor baja a complex64
            r = instantaneous_range(radar, target, tau[start:start + step])
            phasor = np.exp(1j * (k * r[..., None] * fast_term))
            block += (target.reflectivity * phasor).astype(np.complex64)
        if rng is not None:
            # un único generador recorrido en orden de bloques: mismo cubo en cada ejecución
            noise = rng.standard_normal(block.shape + (2,), dtype=np.float32)
            block += (sigma * (noise[..., 0] + 1j * noise[..., 1])).astype(np.complex64)

    logger.debug(
        f"Radar {radar_id}: cubo sintetizado {samples.shape} "
        f"({len(scene.targets)} blancos, offset {radar.start_offset:g} s, SNR {scene.noise_snr_db})"
    )
    return DataCube(radar_id=radar_id, samples=samples, waveform=waveform, start_offset=radar.start_offset)


def apply_start_offset(cube: DataCube, offset: float, scene: SceneConfig) -> DataCube:
    """
    Devuelve el cubo re-sintetizado con su eje lento retrasado `offset` segundos más.
    El cubo no conserva la escena, por eso se pasa aparte.
    """
    if offset < 0:
        raise ConfigValueError(f"el offset de inicio debe ser >= 0 (recibido {offset})")
    if offset == 0:
        return cube

    radar = scene.radar(cube.radar_id)
    shifted = replace(radar, start_offset=cube.start_offset + offset)
    radars = tuple(shifted if r.id == cube.radar_id else r for r in scene.radars)
    logger.info(f"Radar {cube.radar_id}: aplicando offset de inicio {offset:g} s (total {shifted.start_offset:g} s)")
    return synthesize_if_cube(replace(scene, radars=radars), cube.radar_id)


def synthesize_all(scene: SceneConfig, workers: int = 1) -> List[DataCube]:
    """Sintetiza un cubo por radar; el resultado sigue el orden de scene.radars."""
    ids = [radar.id for radar in scene.radars]
    if workers <= 1 or len(ids) == 1:
        return [synthesize_if_cube(scene, radar_id) for radar_id in ids]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda radar_id: synthesize_if_cube(scene, radar_id), ids))
