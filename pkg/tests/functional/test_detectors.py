"""Tests fonctionnels des détecteurs : seuil optimal, BEP analytique et Monte Carlo."""
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest

ROOT = Path(__file__).resolve().parents[2]
sys.path.insert(0, str(ROOT))
sys.path.insert(0, str(ROOT / "src"))

from src.core.binding.sampler import make_rng, sample_symbols  # noqa: E402
from src.core.detection.detectors import (  # noqa: E402
    ALL_KINDS,
    BepResult,
    DecisionModel,
    StatisticKind,
    analytic_bep,
    build_decision_model,
    decide,
    monte_carlo_bep,
    monte_carlo_bep_all,
    optimal_threshold,
    statistic_values,
    threshold_density_mismatch,
)
from src.core.detection.estimators import GaussianMoments  # noqa: E402
from src.core.errors import DomainError, NumericError  # noqa: E402


def test_statistic_kind_from_name():
    assert StatisticKind.from_name("drut") is StatisticKind.TOTAL_CONC
    assert StatisticKind.from_name("SIGNAL_CONC") is StatisticKind.SIGNAL_CONC
    assert StatisticKind.from_name(" DNBR ") is StatisticKind.BOUND_COUNT
    with pytest.raises(DomainError):
        StatisticKind.from_name("XYZ")


def test_all_kinds_order():
    assert [k.value for k in ALL_KINDS] == ["DNBR", "DRUT", "DRBT", "DRUBT"]


# =============================================================================
# SEUIL
# =============================================================================

def test_equal_variances_use_midpoint():
    m0, m1 = GaussianMoments(1.0, 0.25), GaussianMoments(3.0, 0.25)
    assert optimal_threshold(m0, m1) == 2.0


def test_threshold_lies_between_means():
    m0, m1 = GaussianMoments(1.0, 0.2), GaussianMoments(3.0, 0.9)
    lam = optimal_threshold(m0, m1)
    assert 1.0 < lam < 3.0
    model = DecisionModel.from_moments(StatisticKind.TOTAL_CONC, m0, m1)
    assert threshold_density_mismatch(model) < 1e-9


def test_threshold_stable_for_close_large_means():
    """Grandes moyennes, variances quasi égales : pas d'annulation catastrophique."""
    m0 = GaussianMoments(1e6, 1.0)
    m1 = GaussianMoments(1e6 + 10.0, 1.0 + 1e-7)
    lam = optimal_threshold(m0, m1)
    assert abs(lam - (1e6 + 5.0)) < 0.1
    model = DecisionModel(StatisticKind.BOUND_COUNT, m0, m1, lam)
    assert threshold_density_mismatch(model) < 1e-3


@pytest.mark.parametrize("kind", ALL_KINDS)
def test_reference_thresholds_equalize_densities(reference_scenario, reference_scheme, kind):
    model = build_decision_model(reference_scenario, kind, reference_scheme)
    assert threshold_density_mismatch(model) < 1e-9


@pytest.mark.parametrize("kind", ALL_KINDS)
def test_threshold_perturbation_never_lowers_bep(reference_scenario, reference_scheme, kind):
    model = build_decision_model(reference_scenario, kind, reference_scheme)
    best = analytic_bep(model)
    for factor in (0.9, 0.99, 1.01, 1.1):
        assert analytic_bep(model, model.threshold * factor) >= best


def test_decision_model_rejects_inverted_means():
    with pytest.raises(NumericError):
        DecisionModel(StatisticKind.RATIO, GaussianMoments(2.0, 1.0), GaussianMoments(1.0, 1.0), 1.5)


# =============================================================================
# DÉCISION ET BEP ANALYTIQUE
# =============================================================================

def test_decide_ties_go_to_zero():
    model = DecisionModel(StatisticKind.BOUND_COUNT, GaussianMoments(0.0, 1.0), GaussianMoments(2.0, 1.0), 1.0)
    assert decide(1.0, model) == 0
    assert decide(1.0001, model) == 1
    np.testing.assert_array_equal(decide(np.array([0.5, 1.0, 1.5]), model), [0, 0, 1])


def test_bep_half_for_equal_bits(reference_scenario, reference_scheme):
    scenario = replace(reference_scenario, c_bit0=reference_scenario.c_bit1)
    for kind in ALL_KINDS:
        model = build_decision_model(scenario, kind, reference_scheme)
        assert analytic_bep(model) == pytest.approx(0.5)


def test_reference_bep_ordering(reference_scenario, reference_scheme):
    """Au point de référence, DRUBT domine les trois autres détecteurs."""
    bep = {k: analytic_bep(build_decision_model(reference_scenario, k, reference_scheme)) for k in ALL_KINDS}
    for value in bep.values():
        assert 0.0 < value < 0.5
    assert bep[StatisticKind.SIGNAL_CONC] < min(bep[k] for k in ALL_KINDS if k is not StatisticKind.SIGNAL_CONC)
    assert bep[StatisticKind.BOUND_COUNT] > bep[StatisticKind.TOTAL_CONC]


def test_statistic_values_need_scheme(small_scenario, rng):
    batch = sample_symbols(small_scenario, [0, 1], rng)
    with pytest.raises(DomainError):
        statistic_values(batch, StatisticKind.RATIO, small_scenario, None)
    assert statistic_values(batch, StatisticKind.BOUND_COUNT, small_scenario).shape == (2,)


# =============================================================================
# MONTE CARLO
# =============================================================================

def test_bep_result_consistency_rule():
    assert BepResult(0.01, 0.0105, 100000, 0.0006).consistent()
    assert not BepResult(0.01, 0.02, 100000, 0.0009).consistent()
    # peu d'essais : la tolérance binomiale domine
    assert BepResult(0.01, 0.013, 1000, 0.007).consistent()


def test_monte_carlo_requires_enough_trials(small_scenario):
    with pytest.raises(DomainError):
        monte_carlo_bep(small_scenario, StatisticKind.TOTAL_CONC, 999)


def test_monte_carlo_independent_of_worker_count(small_scenario):
    kinds = [StatisticKind.BOUND_COUNT, StatisticKind.RATIO]
    serial = monte_carlo_bep_all(small_scenario, kinds, 5000, seed=3, workers=1, block_size=1000)
    parallel = monte_carlo_bep_all(small_scenario, kinds, 5000, seed=3, workers=3, block_size=1000)
    for kind in kinds:
        assert serial[kind].mc_errors == parallel[kind].mc_errors


def test_monte_carlo_reproducible_for_seed(small_scenario):
    a = monte_carlo_bep(small_scenario, StatisticKind.BOUND_COUNT, 5000, seed=1)
    b = monte_carlo_bep(small_scenario, StatisticKind.BOUND_COUNT, 5000, seed=1)
    assert a == b


def test_monte_carlo_matches_analytic_at_reference(reference_scenario):
    trials = 20000
    results = monte_carlo_bep_all(reference_scenario, [StatisticKind.BOUND_COUNT, StatisticKind.RATIO],
                                  trials, seed=11)
    for result in results.values():
        assert result.mc_trials == trials
        assert result.mc_ci95 == pytest.approx(1.96 * math.sqrt(result.mc_bep * (1 - result.mc_bep) / trials))
        assert result.consistent(relative=0.25, sigmas=4.0)


def test_monte_carlo_progress(small_scenario):
    calls = []
    monte_carlo_bep(small_scenario, StatisticKind.TOTAL_CONC, 3000, block_size=1000,
                    progress_callback=lambda done, total, msg: calls.append((done, total)))
    assert calls == [(1, 3), (2, 3), (3, 3)]


def test_statistic_values_match_direct_estimates(small_scenario, reference_scheme):
    rng = make_rng(8)
    batch = sample_symbols(small_scenario, [0, 1, 1], rng, t1=reference_scheme.t1)
    values = statistic_values(batch, StatisticKind.TOTAL_CONC, small_scenario)
    expected = (small_scenario.n_receptors - 1) / (20.0 * batch.total_unbound_time)
    np.testing.assert_allclose(values, expected)
