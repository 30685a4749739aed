"""
Module de configuration du logging.
Gestion centralisée des logs de receptorlab.
"""

import logging
import os
import sys
from datetime import datetime
from pathlib import Path
from typing import Optional

ROOT_LOGGER = 'receptorlab'
# Les modules loguent sous leur chemin d'import (src.core...)
PACKAGE_LOGGERS = (ROOT_LOGGER, 'src')

VERBOSITY_LEVELS = {0: "WARNING", 1: "INFO"}


def get_log_dir() -> Path:
    """Retourne le répertoire des logs."""
    if os.name == 'nt':
        base = os.environ.get('LOCALAPPDATA', os.path.expanduser('~'))
        log_dir = Path(base) / 'receptorlab' / 'logs'
    else:
        log_dir = Path.home() / '.local' / 'share' / 'receptorlab' / 'logs'

    log_dir.mkdir(parents=True, exist_ok=True)
    return log_dir


def level_for_verbosity(verbose: int) -> str:
    """0 → WARNING, 1 → INFO, 2 et plus → DEBUG."""
    return VERBOSITY_LEVELS.get(verbose, "DEBUG" if verbose > 1 else "WARNING")


def set_log_level(level: str) -> bool:
    """Change le niveau de log à chaud.

    Met à jour les loggers du paquet ET tous leurs handlers.

    Args:
        level: "DEBUG" | "INFO" | "WARNING" | "ERROR" (case-insensitive)

    Returns:
        ``True`` si le niveau a été appliqué, ``False`` si invalide.
    """
    log_level = getattr(logging, level.upper(), None)
    if not isinstance(log_level, int):
        return False
    for name in PACKAGE_LOGGERS:
        package_logger = logging.getLogger(name)
        package_logger.setLevel(log_level)
        for handler in package_logger.handlers:
            handler.setLevel(log_level)
    logging.getLogger(ROOT_LOGGER).debug(f"Niveau de log changé : {level.upper()}")
    return True


def setup_logging(
    level: str = "INFO",
    log_to_file: bool = False,
    log_file: Optional[str] = None
) -> logging.Logger:
    """
    Configure le système de logging.

    Args:
        level: Niveau de log (DEBUG, INFO, WARNING, ERROR)
        log_to_file: Écrire dans un fichier
        log_file: Chemin du fichier de log (relatif au répertoire des logs, auto-généré si non fourni)

    Returns:
        Logger racine configuré
    """
    log_level = getattr(logging, level.upper(), logging.INFO)

    formatter = logging.Formatter(
        '%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        datefmt='%Y-%m-%d %H:%M:%S'
    )

    handlers = []

    # Handler console (stderr : stdout reste aux résultats)
    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(log_level)
    console_handler.setFormatter(formatter)
    handlers.append(console_handler)

    # Handler fichier
    file_error = None
    if log_to_file:
        if log_file and Path(log_file).is_absolute():
            log_path = Path(log_file)
            log_path.parent.mkdir(parents=True, exist_ok=True)
        elif log_file:
            log_path = get_log_dir() / log_file
        else:
            timestamp = datetime.now().strftime('%Y%m%d')
            log_path = get_log_dir() / f"receptorlab_{timestamp}.log"

        try:
            file_handler = logging.FileHandler(log_path, encoding='utf-8')
            file_handler.setLevel(log_level)
            file_handler.setFormatter(formatter)
            handlers.append(file_handler)
        except OSError as e:
            file_error = e

    for name in PACKAGE_LOGGERS:
        package_logger = logging.getLogger(name)
        package_logger.setLevel(log_level)
        package_logger.handlers.clear()
        for handler in handlers:
            package_logger.addHandler(handler)

    root_logger = logging.getLogger(ROOT_LOGGER)
    if file_error is not None:
        root_logger.warning(f"Impossible de créer le fichier de log: {file_error}")
    return root_logger


def get_logger(name: str) -> logging.Logger:
    """
    Retourne un logger pour un module spécifique.

    Args:
        name: Nom du module

    Returns:
        Logger configuré
    """
