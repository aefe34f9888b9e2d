# respirad/errors.py

from typing import Optional

from .constants import (
    EXIT_CONFIG,
    EXIT_EVAL_MISMATCH,
    EXIT_IO,
    EXIT_NO_ASSOCIATIONS,
    EXIT_NO_DETECTIONS,
)


class RespiradError(Exception):
    """Error base del paquete. Cada subclase sabe con qué código debe salir el CLI."""
    exit_code = EXIT_CONFIG


class ConfigurationError(RespiradError):
    exit_code = EXIT_CONFIG


class ConfigSyntaxError(ConfigurationError):
    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        prefix = f"línea {line}: " if line is not None else ""
        super().__init__(f"{prefix}{message}")


class ConfigValueError(ConfigurationError):
    pass


class ProcessingError(RespiradError):
    """Precondición numérica violada (serie demasiado corta, banda vacía, ...)."""


class DegenerateSignalError(ProcessingError):
    pass


class InfeasiblePairingError(ProcessingError):
    """Los dos círculos de rango no se cortan delante de la línea de radares."""


class StorageError(RespiradError):
    exit_code = EXIT_IO

    def __init__(self, message: str, path=None):
        self.path = path
        super().__init__(f"{message} ({path})" if path is not None else message)


class NoDetectionsError(RespiradError):
    exit_code = EXIT_NO_DETECTIONS


class NoAssociationsError(RespiradError):
    exit_code = EXIT_NO_ASSOCIATIONS


class EvalMismatchError(RespiradError):
    exit_code = EXIT_EVAL_MISMATCH
