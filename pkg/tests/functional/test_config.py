"""Tests fonctionnels de la configuration de simulation (YAML, presets, validation)."""
import sys
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parents[2]
sys.path.insert(0, str(ROOT))
sys.path.insert(0, str(ROOT / "src"))

from src.config.sim_config import (  # noqa: E402
    PRESETS,
    Axis,
    SimulationConfig,
    SweepConfig,
    SweepSpec,
    load_config_from_yaml,
    parse_detectors,
    save_config_to_yaml,
)
from src.core.crn.receptors import TransductionMode  # noqa: E402
from src.core.detection.detectors import ALL_KINDS, StatisticKind  # noqa: E402
from src.core.detection.estimators import VarianceMethod  # noqa: E402
from src.core.errors import ConfigError  # noqa: E402


def test_defaults_build_reference_scenario(reference_scenario):
    config = SimulationConfig()
    assert config.validate() == []
    assert config.build_scenario() == reference_scenario
    assert config.detection.kinds == list(ALL_KINDS)


def test_save_load_roundtrip(tmp_path):
    config = SimulationConfig()
    config.scenario.n_receptors = 2500
    config.detection.detectors = ["DRUT", "DRUBT"]
    config.detection.variance_method = VarianceMethod.EXACT
    config.crn.transduction = TransductionMode.KPR
    config.crn.threshold_amplification = 100.0
    config.sweep.values = [1.0, 2.0, 4.0]
    path = tmp_path / "sub" / "config.yaml"
    save_config_to_yaml(config, str(path))
    loaded = load_config_from_yaml(str(path))
    assert loaded.to_dict() == config.to_dict()


def test_empty_file_gives_defaults(tmp_path):
    path = tmp_path / "empty.yaml"
    path.write_text("")
    assert load_config_from_yaml(str(path)).to_dict() == SimulationConfig().to_dict()


def test_invalid_yaml_raises_config_error(tmp_path):
    path = tmp_path / "bad.yaml"
    path.write_text("scenario: [unclosed\n")
    with pytest.raises(ConfigError):
        load_config_from_yaml(str(path))
    path.write_text("- just\n- a list\n")
    with pytest.raises(ConfigError):
        load_config_from_yaml(str(path))


def test_invalid_value_raises_config_error():
    with pytest.raises(ConfigError):
        SimulationConfig.from_dict({'monte_carlo': {'trials': 'many'}})
    with pytest.raises(ConfigError):
        SimulationConfig.from_dict({'sweep': {'axis': 'temperature'}})


def test_missing_file():
    with pytest.raises(FileNotFoundError):
        load_config_from_yaml("/nonexistent/receptorlab.yaml")


# =============================================================================
# VALIDATION
# =============================================================================

def test_validate_collects_errors():
    config = SimulationConfig()
    config.scenario.c_bit1 = 1.0
    config.monte_carlo.trials = 10
    config.detection.detectors = ["DRUT", "NOPE"]
    errors = config.validate()
    assert len(errors) == 3
    with pytest.raises(ConfigError) as excinfo:
        config.sweep_spec()
    assert len(excinfo.value.errors) >= 3


def test_build_scenario_rejects_invalid():
    config = SimulationConfig()
    config.scenario.n_receptors = 2
    with pytest.raises(ConfigError):
        config.build_scenario()


def test_sweep_spec_rejects_non_monotone_values():
    config = SimulationConfig()
    config.monte_carlo.trials = 0
    config.sweep.values = [1.0, 3.0, 2.0]
    with pytest.raises(ConfigError):
        config.sweep_spec()


def test_sweep_spec_validate(reference_scenario):
    spec = SweepSpec(reference_scenario, Axis.INTERFERER_CONC, [3.0, 2.0, 1.0])
    assert spec.validate() == []
    assert SweepSpec(reference_scenario, Axis.INTERFERER_CONC, [], mc_trials=500).validate()


# =============================================================================
# AXES, DÉTECTEURS, GRILLES
# =============================================================================

def test_axis_from_name():
    assert Axis.from_name("bit-ratio") is Axis.BIT_RATIO
    assert Axis.from_name("BIT_RATIO") is Axis.BIT_RATIO
    assert Axis.from_name("receptor-count") is Axis.RECEPTOR_COUNT
    with pytest.raises(ConfigError):
        Axis.from_name("volume")


def test_parse_detectors():
    assert parse_detectors("DRUT,drbt") == [StatisticKind.TOTAL_CONC, StatisticKind.RATIO]
    assert parse_detectors(["DNBR", "DNBR"]) == [StatisticKind.BOUND_COUNT]
    with pytest.raises(ConfigError):
        parse_detectors("")
    with pytest.raises(ConfigError):
        parse_detectors(["DRUT", "FOO"])


def test_resolved_values():
    assert SweepConfig(start=1, stop=3, points=3).resolved_values() == [1.0, 2.0, 3.0]
    assert SweepConfig(start=1, stop=100, points=3, log_spaced=True).resolved_values() == pytest.approx([1, 10, 100])
    grid = SweepConfig(axis=Axis.RECEPTOR_COUNT, start=100, stop=100_000, points=13, log_spaced=True)
    values = grid.resolved_values()
    assert values[0] == 100 and values[-1] == 100_000
    assert all(isinstance(v, int) for v in values)
    assert values == sorted(set(values))
    assert SweepConfig(values=[0.5, 0.7]).resolved_values() == [0.5, 0.7]


# =============================================================================
# PRESETS
# =============================================================================

@pytest.mark.parametrize("name", sorted(PRESETS))
def test_every_preset_builds_a_valid_sweep(name):
    config = SimulationConfig()
    config.apply_preset(name)
    config.monte_carlo.trials = 0
    spec = config.sweep_spec()
    assert spec.values
    assert config.sweep.preset == name


def test_saturated_preset_concentrations():
    config = SimulationConfig()
    config.apply_preset('interference-saturated')
    kd = config.scenario.kd_signal
    assert config.scenario.c_bit0 == pytest.approx(19 * kd)
    assert config.scenario.c_bit1 == pytest.approx(20 * kd)
    assert config.sweep.axis is Axis.INTERFERER_CONC


def test_unknown_preset():
    with pytest.raises(ConfigError):
        SimulationConfig().apply_preset('nope')


def test_explicit_keys_override_preset():
    config = SimulationConfig.from_dict({
        'scenario': {'n_receptors': 1000},
        'sweep': {'preset': 'affinity-high', 'points': 5},
    })
    assert config.sweep.axis is Axis.AFFINITY_RATIO
    assert config.sweep.log_spaced
    assert config.sweep.points == 5
    assert config.scenario.n_receptors == 1000
    assert config.sweep.preset == 'affinity-high'


def test_performance_workers_auto():
    config = SimulationConfig()
    assert 1 <= config.performance.workers <= 8
    config.performance.max_workers = 3
    assert config.performance.workers == 3
