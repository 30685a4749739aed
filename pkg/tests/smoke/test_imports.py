"""Smoke tests : tout le projet doit s'importer sans erreur."""
import importlib
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[2]
sys.path.insert(0, str(ROOT))
sys.path.insert(0, str(ROOT / "src"))

MODULES = [
    "src.core.errors",
    "src.core.binding.kinetics",
    "src.core.binding.sampler",
    "src.core.detection.estimators",
    "src.core.detection.detectors",
    "src.core.crn.network",
    "src.core.crn.solvers",
    "src.core.crn.receptors",
    "src.core.experiments.sweep",
    "src.core.experiments.histograms",
    "src.core.experiments.crn_validation",
    "src.config.sim_config",
    "src.reports.sweep_reporter",
    "src.utils.logger",
    "src.cli.sim_cli",
]


def test_all_modules_importable():
    """Tous les modules doivent s'importer sans crash."""
    for module_name in MODULES:
        importlib.import_module(module_name)


def test_main_module_callable():
    """Le point d'entrée doit être importable et exposer `main`."""
    import src.main as m
    assert callable(m.main)
    assert callable(m.check_dependencies)


def test_parser_lists_every_command():
    from src.cli.sim_cli import COMMANDS, create_argument_parser
    parser = create_argument_parser()
    for command in COMMANDS:
        assert parser.parse_args([command]).command == command


def test_version_is_single_source():
    """La version du paquet est celle déclarée dans pyproject.toml."""
    from src import __version__
    text = (ROOT / "pyproject.toml").read_text(encoding="utf-8")
    assert f'version = "{__version__}"' in text
