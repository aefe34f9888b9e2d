# respirad/storage/cube_file.py
# Formato binario MSRC (little-endian) para los cubos IF de cada radar.
#
# v1: magic "MSRC", version u32, radar_id u32, f_start f64, bandwidth f64, chirp_duration f64,
#     adc_sample_rate f64, start_offset f64, n_frames u32, chirps_per_frame u32,
#     fast_time_samples u32, y después pares (I, Q) f32 trama-chirp-muestra.
# v2: igual que v1 con un f64 frame_period justo después de start_offset.

import logging
import os
import struct

import numpy as np

from ..constants import CUBE_FORMAT_VERSION, CUBE_FORMAT_VERSION_FRAMED, CUBE_MAGIC
from ..errors import ConfigurationError, StorageError
from ..models import DataCube, WaveformConfig

logger = logging.getLogger(__name__)

_HEADER_V1 = struct.Struct("<4sIIdddddIII")
_HEADER_V2 = struct.Struct("<4sIIddddddIII")
_PREFIX = struct.Struct("<4sI")
_SAMPLE_DTYPE = np.dtype("<f4")
_COMPLEX_DTYPE = np.dtype("<c8")


def write_cube(cube: DataCube, path: str) -> str:
    wf = cube.waveform
    if wf.has_idle_time:
        header = _HEADER_V2.pack(
            CUBE_MAGIC, CUBE_FORMAT_VERSION_FRAMED, cube.radar_id,
            wf.f_start, wf.bandwidth, wf.chirp_duration, wf.adc_sample_rate,
            cube.start_offset, wf.frame_period,
            wf.n_frames, wf.chirps_per_frame, wf.fast_time_samples,
        )
    else:
        header = _HEADER_V1.pack(
            CUBE_MAGIC, CUBE_FORMAT_VERSION, cube.radar_id,
            wf.f_start, wf.bandwidth, wf.chirp_duration, wf.adc_sample_rate,
            cube.start_offset,
            wf.n_frames, wf.chirps_per_frame, wf.fast_time_samples,
        )

    iq = np.empty(cube.samples.shape + (2,), dtype=_SAMPLE_DTYPE)
    iq[..., 0] = cube.samples.real
    iq[..., 1] = cube.samples.imag

    try:
        with open(path, "wb") as f:
            f.write(header)
            f.write(iq.tobytes(order="C"))
    except OSError as e:
        raise StorageError(f"no se pudo escribir el cubo del radar {cube.radar_id}: {e.strerror}", path) from e
    logger.info(f"Cubo del radar {cube.radar_id} guardado en {path} ({os.path.getsize(path)} bytes)")
    return path


def read_cube(path: str) -> DataCube:
    try:
        with open(path, "rb") as f:
            raw = f.read()
    except OSError as e:
        raise StorageError(f"no se pudo leer el cubo: {e.strerror}", path) from e

    if len(raw) < _PREFIX.size:
        raise StorageError("archivo demasiado corto para una cabecera MSRC", path)
    magic, version = _PREFIX.unpack_from(raw)
    if magic != CUBE_MAGIC:
        raise StorageError(f"magic inválido {magic!r}", path)

    if version == CUBE_FORMAT_VERSION:
        header = _HEADER_V1
    elif version == CUBE_FORMAT_VERSION_FRAMED:
        header = _HEADER_V2
    else:
        raise StorageError(f"versión de formato no soportada: {version}", path)
    if len(raw) < header.size:
        raise StorageError("cabecera MSRC truncada", path)

    fields = header.unpack_from(raw)
    frame_period = None
    if version == CUBE_FORMAT_VERSION:
        _, _, radar_id, f_start, bandwidth, chirp_duration, adc_rate, start_offset, n_frames, chirps, samples = fields
    else:
        (_, _, radar_id, f_start, bandwidth, chirp_duration, adc_rate, start_offset, frame_period,
         n_frames, chirps, samples) = fields

    try:
        waveform = WaveformConfig(
            f_start=f_start,
            bandwidth=bandwidth,
            chirp_duration=chirp_duration,
            chirps_per_frame=chirps,
            n_frames=n_frames,
            fast_time_samples=samples,
            adc_sample_rate=adc_rate,
            frame_period=frame_period,
        )
    except ConfigurationError as e:
        raise StorageError(f"cabecera con parámetros inválidos: {e}", path) from e

    expected = n_frames * chirps * samples * 2 * _SAMPLE_DTYPE.itemsize
    payload = raw[header.size:]
    if len(payload) != expected:
        raise StorageError(f"se esperaban {expected} bytes de muestras y hay {len(payload)}", path)

    # pares (I, Q) f32 little-endian == complex64 little-endian
    data = np.frombuffer(payload, dtype=_COMPLEX_DTYPE).reshape(n_frames, chirps, samples).astype(np.complex64)
    try:
        cube = DataCube(radar_id=radar_id, samples=data, waveform=waveform, start_offset=start_offset)
    except ConfigurationError as e:
        raise StorageError(f"muestras inválidas: {e}", path) from e
    logger.debug(f"Cubo del radar {radar_id} leído de {path} (formato v{version})")
    return cube
