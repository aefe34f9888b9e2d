# respirad/__init__.py

import os
import logging
from dataclasses import dataclass
from typing import Optional

from dotenv import load_dotenv

from .constants import DEFAULT_PROFILE_OVERSAMPLE

# --- Configurar logger para este módulo ---
logger = logging.getLogger(__name__)

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

DEFAULT_LOG_LEVEL = "INFO"
DEFAULT_WORKERS = 2


@dataclass(frozen=True)
class Settings:
    """Ajustes del proceso leídos del entorno (.env)."""
    log_level: str = DEFAULT_LOG_LEVEL
    workers: int = DEFAULT_WORKERS
    profile_oversample: int = DEFAULT_PROFILE_OVERSAMPLE


def configure_logging(level: str = DEFAULT_LOG_LEVEL) -> None:
    numeric_level = logging.getLevelName(str(level).upper())
    if not isinstance(numeric_level, int):
        numeric_level = logging.INFO
    logging.basicConfig(level=numeric_level, format=LOG_FORMAT)
    logging.getLogger("respirad").setLevel(numeric_level)


def _int_from_env(key: str, default: int, minimum: int = 1) -> int:
    raw = os.environ.get(key)
    if raw is None or raw.strip() == "":
        return default
    try:
        value = int(raw)
    except ValueError:
        logger.warning(f"{key}='{raw}' no es un entero válido. Usando valor por defecto {default}.")
        return default
    if value < minimum:
        logger.warning(f"{key}={value} fuera de rango (mínimo {minimum}). Usando valor por defecto {default}.")
        return default
    return value


def create_runtime(log_level: Optional[str] = None) -> Settings:
    """
    Carga el .env, configura el logging y devuelve los ajustes del proceso.
    `log_level` (p.ej. de --log-level en el CLI) tiene prioridad sobre RESPIRAD_LOG_LEVEL.
    """
    load_dotenv()

    level = log_level or os.environ.get("RESPIRAD_LOG_LEVEL", DEFAULT_LOG_LEVEL)
    configure_logging(level)

    settings = Settings(
        log_level=str(level).upper(),
        workers=_int_from_env("RESPIRAD_WORKERS", DEFAULT_WORKERS),
        profile_oversample=_int_from_env("RESPIRAD_PROFILE_OVERSAMPLE", DEFAULT_PROFILE_OVERSAMPLE),
    )
    logger.debug(f"Ajustes de ejecución: {settings}")
    return settings
