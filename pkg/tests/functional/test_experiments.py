"""Tests fonctionnels des expériences : balayages, histogrammes, validation des réseaux."""
import json
import math
import sys
from pathlib import Path

import numpy as np
import pytest

ROOT = Path(__file__).resolve().parents[2]
sys.path.insert(0, str(ROOT))
sys.path.insert(0, str(ROOT / "src"))

from src.config.sim_config import Axis, SimulationConfig, SweepSpec  # noqa: E402
from src.core.binding.kinetics import default_time_threshold  # noqa: E402
from src.core.crn.receptors import TransductionMode  # noqa: E402
from src.core.detection.detectors import ALL_KINDS  # noqa: E402
from src.core.detection.estimators import VarianceMethod  # noqa: E402
from src.core.errors import ConfigError, DomainError, SingularityError  # noqa: E402
from src.core.experiments.crn_validation import draw_symbol, network_threshold, run_crn_validation  # noqa: E402
from src.core.experiments.histograms import emit_histograms  # noqa: E402
from src.core.experiments.sweep import SweepRunner, apply_axis, run_sweep, sweep_columns  # noqa: E402

DNBR, DRUT, DRBT, DRUBT = ALL_KINDS


def _analytic_sweep(scenario, axis, values, kinds=ALL_KINDS):
    return run_sweep(SweepSpec(scenario, axis, list(values), list(kinds)))


# =============================================================================
# AXES
# =============================================================================

def test_apply_axis(reference_scenario):
    assert apply_axis(reference_scenario, Axis.INTERFERER_CONC, 4.0).mean_c_in == pytest.approx(10.0)
    assert apply_axis(reference_scenario, Axis.AFFINITY_RATIO, 0.5).spec_in.k_off == pytest.approx(20.0)
    assert apply_axis(reference_scenario, Axis.BIT_RATIO, 0.5).c_bit0 == pytest.approx(1.25)
    assert apply_axis(reference_scenario, Axis.RECEPTOR_COUNT, 100.0).n_receptors == 100


@pytest.mark.parametrize("axis,value", [
    (Axis.INTERFERER_CONC, -1.0),
    (Axis.AFFINITY_RATIO, 0.0),
    (Axis.BIT_RATIO, 1.5),
    (Axis.RECEPTOR_COUNT, 2.0),
    (Axis.RECEPTOR_COUNT, 100.5),
])
def test_apply_axis_rejects_invalid(reference_scenario, axis, value):
    with pytest.raises(ConfigError):
        apply_axis(reference_scenario, axis, value)


def test_sweep_columns():
    columns = sweep_columns([DRUT])
    assert columns[:3] == ['axis_value', 'p_bound_bit0', 'p_bound_bit1']
    assert columns[3] == 'DRUT_analytic_bep'
    assert len(columns) == 3 + 8


# =============================================================================
# BALAYAGES ANALYTIQUES
# =============================================================================

def test_receptor_sweep_bep_decreases(reference_scenario):
    result = _analytic_sweep(reference_scenario, Axis.RECEPTOR_COUNT, [100, 1000, 10000, 100000])
    for kind in ALL_KINDS:
        series = result.series(kind)
        assert all(a > b for a, b in zip(series, series[1:])), kind


def test_interference_preset_signal_conc_dominates():
    config = SimulationConfig()
    config.apply_preset('interference')
    config.monte_carlo.trials = 0
    spec = config.sweep_spec()
    spec.output_path = None
    result = run_sweep(spec)
    assert len(result.rows) == 20
    for row in result.rows:
        best = row.detectors[DRUBT].analytic_bep
        assert all(best < row.detectors[k].analytic_bep for k in (DNBR, DRUT, DRBT))


def test_saturated_interference_orderings():
    config = SimulationConfig()
    config.apply_preset('interference-saturated')
    scenario = config.build_scenario()
    result = _analytic_sweep(scenario, Axis.INTERFERER_CONC, [1.0, 2.0, 4.0])
    at_kd, at_2kd, at_4kd = result.rows
    assert at_kd.detectors[DRUT].analytic_bep < at_kd.detectors[DRUBT].analytic_bep
    assert at_2kd.detectors[DRBT].analytic_bep > at_4kd.detectors[DRBT].analytic_bep


def test_total_conc_invariant_along_affinity(reference_scenario):
    values = np.linspace(0.05, 0.95, 5)
    result = _analytic_sweep(reference_scenario, Axis.AFFINITY_RATIO, values, [DRUT])
    series = result.series(DRUT)
    assert all(v == series[0] for v in series)


def test_bit_ratio_near_one_is_guessing(reference_scenario):
    result = _analytic_sweep(reference_scenario, Axis.BIT_RATIO, [0.5, 0.99])
    for kind in ALL_KINDS:
        assert result.rows[-1].detectors[kind].analytic_bep > 0.4
        assert result.rows[0].detectors[kind].analytic_bep < result.rows[-1].detectors[kind].analytic_bep


def test_singular_affinity_rejects_binning_detectors(reference_scenario):
    with pytest.raises(ConfigError):
        _analytic_sweep(reference_scenario, Axis.AFFINITY_RATIO, [0.5, 1.0, 2.0], [DRUT, DRBT])


def test_singular_affinity_allowed_without_binning(reference_scenario):
    result = _analytic_sweep(reference_scenario, Axis.AFFINITY_RATIO, [0.5, 1.0, 2.0], [DNBR, DRUT])
    assert len(result.rows) == 3


def test_invalid_spec_rejected(reference_scenario):
    with pytest.raises(ConfigError):
        SweepRunner(SweepSpec(reference_scenario, Axis.INTERFERER_CONC, [1.0, 1.0]))


def test_sweep_progress_and_cancel(reference_scenario):
    calls = []
    runner = SweepRunner(SweepSpec(reference_scenario, Axis.INTERFERER_CONC, [1.0, 2.0, 3.0], [DRUT]))
    result = runner.run(lambda done, total, msg: calls.append((done, total)))
    assert calls == [(1, 3), (2, 3), (3, 3)]
    assert not result.cancelled
    assert math.isnan(result.rows[0].detectors[DRUT].mc_bep)


# =============================================================================
# BALAYAGES MONTE CARLO
# =============================================================================

def test_monte_carlo_sweep_is_reproducible(small_scenario, tmp_path):
    def run(path, workers):
        spec = SweepSpec(small_scenario, Axis.INTERFERER_CONC, [1.0, 2.0], [DNBR, DRUT], mc_trials=2000, seed=5,
                         output_path=str(path))
        return run_sweep(spec, max_workers=workers, block_size=1000)

    first = run(tmp_path / "a.csv", 1)
    second = run(tmp_path / "b.csv", 2)
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    assert first.files['csv'] == str(tmp_path / "a.csv")
    for kind in (DNBR, DRUT):
        assert first.series(kind, 'mc_bep') == second.series(kind, 'mc_bep')
        assert all(0.0 <= v <= 1.0 for v in first.series(kind, 'mc_bep'))


def test_monte_carlo_sweep_through_equal_affinity(small_scenario):
    """DNBR et DRUT n'utilisent pas les bins : eta = 1 reste mesurable."""
    spec = SweepSpec(small_scenario, Axis.AFFINITY_RATIO, [0.5, 1.0], [DNBR, DRUT], mc_trials=1000, seed=1)
    result = run_sweep(spec)
    assert len(result.rows) == 2
    for kind in (DNBR, DRUT):
        assert all(0.0 <= v <= 1.0 for v in result.series(kind, 'mc_bep'))


def test_monte_carlo_sweep_rejects_binned_detector_at_equal_affinity(small_scenario):
    spec = SweepSpec(small_scenario, Axis.AFFINITY_RATIO, [0.5, 1.0], [DRUT, DRUBT], mc_trials=1000, seed=1)
    with pytest.raises(ConfigError):
        run_sweep(spec)


# =============================================================================
# HISTOGRAMMES
# =============================================================================

def test_histograms_match_gaussian_moments(reference_scenario):
    report = emit_histograms(reference_scenario, 0, 50000, seed=1, method=VarianceMethod.EXACT)
    assert set(report.histograms) == set(ALL_KINDS)
    for kind, histogram in report.histograms.items():
        assert abs(histogram.mean_z) < 4.0, kind
        assert abs(histogram.variance_z) < 5.0, kind
        assert histogram.ks_fitted < 0.02, kind
        assert histogram.counts.sum() == 50000


def test_histogram_files(small_scenario, tmp_path):
    out = tmp_path / "hist.csv"
    report = emit_histograms(small_scenario, 1, 2000, kinds=[DRUT], bins=20, output_path=str(out))
    lines = out.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "# receptorlab-histogram v1"
    assert len(lines) == 2 + 20
    summary = json.loads((tmp_path / "hist.json").read_text(encoding="utf-8"))
    assert summary['bit'] == 1
    assert summary['statistics'][0]['statistic'] == 'DRUT'
    assert report.histograms[DRUT].overlay().shape == (20,)


def test_histograms_need_enough_iterations(small_scenario):
    with pytest.raises(DomainError):
        emit_histograms(small_scenario, 0, 500)


def test_histograms_at_equal_affinity(small_scenario):
    scenario = apply_axis(small_scenario, Axis.AFFINITY_RATIO, 1.0)
    report = emit_histograms(scenario, 0, 2000, kinds=[DNBR, DRUT])
    assert set(report.histograms) == {DNBR, DRUT}
    assert report.histograms[DRUT].counts.sum() == 2000
    with pytest.raises(SingularityError):
        emit_histograms(scenario, 0, 2000, kinds=[DRBT])


# =============================================================================
# VALIDATION DES RÉSEAUX
# =============================================================================

def test_network_threshold_scaling():
    assert network_threshold(DRUT, 7.0, 100) == pytest.approx(7.0 * 100 / 99)
    assert network_threshold(DRUBT, 2.0, 100) == pytest.approx(2.0 * 100 / 99)
    assert network_threshold(DRBT, 0.3, 100) == 0.3
    assert network_threshold(DNBR, 8700.0, 100) == 8700.0


def test_crn_validation_agrees_with_direct_detectors(reference_scenario):
    report = run_crn_validation(reference_scenario, 200, seed=4, ode_check_symbols=3)
    for kind, agreement in report.detectors.items():
        assert agreement.symbols == 200
        assert agreement.agreement_rate >= 0.98, kind
    assert report.detectors[DNBR].agreement_rate == 1.0
    for kind in (DRUT, DRBT, DRUBT):
        assert report.detectors[kind].ode_checked == 3
        assert report.detectors[kind].max_steady_state_error <= 1e-6
    assert report.kpr_relative_error <= 0.10
    assert report.to_dict()['transduction'] == 'ideal'


def test_crn_validation_with_proofreading(reference_scenario):
    report = run_crn_validation(reference_scenario, 100, seed=2, kinds=[DRBT], ode_check_symbols=0,
                                transduction=TransductionMode.KPR)
    assert report.detectors[DRBT].symbols == 100
    assert report.detectors[DRBT].ode_checked == 0


def test_crn_validation_needs_enough_symbols(small_scenario):
    with pytest.raises(DomainError):
        run_crn_validation(small_scenario, 50)


def test_crn_validation_at_equal_affinity(small_scenario):
    scenario = apply_axis(small_scenario, Axis.AFFINITY_RATIO, 1.0)
    report = run_crn_validation(scenario, 100, seed=3, kinds=[DNBR, DRUT], ode_check_symbols=1)
    assert report.detectors[DNBR].symbols == 100
    assert report.detectors[DNBR].agreement_rate == 1.0
    assert report.detectors[DRUT].ode_checked == 1
    assert math.isfinite(report.kpr_relative_error)


def test_symbols_have_their_own_substream(small_scenario):
    t1 = default_time_threshold(small_scenario.spec_in)
    first = draw_symbol(small_scenario, 1, 8, 5, t1)
    again = draw_symbol(small_scenario, 1, 8, 5, t1)
    other = draw_symbol(small_scenario, 1, 8, 6, t1)
    np.testing.assert_array_equal(first.bound_durations, again.bound_durations)
    assert first.total_unbound_time == again.total_unbound_time
    assert first.total_unbound_time != other.total_unbound_time


def test_crn_validation_is_reproducible(small_scenario):
    first = run_crn_validation(small_scenario, 100, seed=6, kinds=[DNBR, DRUT], ode_check_symbols=0)
    second = run_crn_validation(small_scenario, 100, seed=6, kinds=[DNBR, DRUT], ode_check_symbols=0)
    assert first.to_dict() == second.to_dict()
