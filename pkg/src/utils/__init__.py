"""
Utilitaires pour receptorlab.
Configuration du logging.
"""

from .logger import get_log_dir, get_logger, level_for_verbosity, set_log_level, setup_logging

__all__ = [
    # Logging
    'setup_logging', 'get_logger', 'set_log_level', 'get_log_dir', 'level_for_verbosity',
]
