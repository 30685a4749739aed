"""Tests du module de logging."""
import logging
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[2]
sys.path.insert(0, str(ROOT))
sys.path.insert(0, str(ROOT / "src"))

from src.utils.logger import (  # noqa: E402
    PACKAGE_LOGGERS,
    get_logger,
    level_for_verbosity,
    set_log_level,
    setup_logging,
)


def _close_handlers():
    for name in PACKAGE_LOGGERS:
        package_logger = logging.getLogger(name)
        for handler in package_logger.handlers:
            handler.close()
        package_logger.handlers.clear()


def test_level_for_verbosity():
    assert level_for_verbosity(0) == "WARNING"
    assert level_for_verbosity(1) == "INFO"
    assert level_for_verbosity(2) == "DEBUG"
    assert level_for_verbosity(5) == "DEBUG"


def test_setup_logging_writes_absolute_file(tmp_path):
    log_file = tmp_path / "logs" / "run.log"
    try:
        setup_logging("DEBUG", log_to_file=True, log_file=str(log_file))
        logging.getLogger("src.core.experiments.sweep").debug("point 3 done")
        for handler in logging.getLogger("src").handlers:
            handler.flush()
        assert "point 3 done" in log_file.read_text(encoding="utf-8")
    finally:
        _close_handlers()


def test_set_log_level_updates_handlers():
    try:
        setup_logging("INFO")
        assert set_log_level("error")
        for name in PACKAGE_LOGGERS:
            package_logger = logging.getLogger(name)
            assert package_logger.level == logging.ERROR
            assert all(h.level == logging.ERROR for h in package_logger.handlers)
        assert not set_log_level("LOUD")
    finally:
        _close_handlers()


def test_get_logger_namespace():
    assert get_logger("sweep").name == "receptorlab.sweep"
