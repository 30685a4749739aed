"""Tests fonctionnels des réseaux de réactions : construction, ODE, SSA, récepteurs, comparateur."""
import math
import sys
from pathlib import Path

import numpy as np
import pytest

ROOT = Path(__file__).resolve().parents[2]
sys.path.insert(0, str(ROOT))
sys.path.insert(0, str(ROOT / "src"))

from src.core.binding.kinetics import bound_probability  # noqa: E402
from src.core.binding.sampler import make_rng, sample_symbol  # noqa: E402
from src.core.crn.network import Pulse, ReactionNetwork  # noqa: E402
from src.core.crn.receptors import (  # noqa: E402
    ActivationParameters,
    DetectorParameters,
    TransductionMode,
    analytic_steady_state,
    build_activation_network,
    build_network,
    choose_threshold_amplification,
    kpr_rate,
    network_decision,
    receptor_design,
    transduce_observation,
    walk_receptor,
)
from src.core.crn.solvers import (  # noqa: E402
    comparator_decide,
    integrate_ode,
    run_comparator,
    simulate_ssa,
)
from src.core.detection.detectors import ALL_KINDS, StatisticKind  # noqa: E402
from src.core.errors import DomainError, NetworkError, SteadyStateTimeout  # noqa: E402


def _birth_death(birth: float = 5.0, death: float = 1.0, start: float = 0.0) -> ReactionNetwork:
    network = ReactionNetwork("birth-death")
    network.add_species("Y", start)
    network.add_reaction([], ["Y"], birth)
    network.add_reaction(["Y"], [], death)
    return network


# =============================================================================
# RÉSEAU
# =============================================================================

def test_network_rejects_duplicates_and_unknown_species():
    network = ReactionNetwork()
    network.add_species("A", 1)
    with pytest.raises(NetworkError):
        network.add_species("A", 2)
    with pytest.raises(NetworkError):
        network.add_reaction(["A"], ["B"], 1.0)
    with pytest.raises(NetworkError):
        network.add_species("B", -1)


def test_network_rejects_high_order_and_bad_rates():
    network = ReactionNetwork()
    network.add_species("A", 3)
    with pytest.raises(NetworkError):
        network.add_reaction({"A": 3}, [], 1.0)
    with pytest.raises(NetworkError):
        network.add_reaction(["A"], [], 0.0)


def test_network_dump_format():
    network = ReactionNetwork()
    network.add_species("A", 1)
    network.add_species("B", 0)
    network.add_reaction(["A", "B"], [], 2.5)
    network.add_reaction({"A": 2}, ["B"], 1.0)
    network.add_reaction([], ["A"], 1.0, trigger=Pulse(0.5, 0.1))
    lines = network.dump().splitlines()
    assert lines[0] == "A + B -> 0 @ 2.5"
    assert lines[1] == "2 A -> B @ 1.0"
    assert lines[2] == "0 -> A @ 1.0 pulse(0.5, 0.1)"


def test_stoichiometry_and_propensities():
    network = ReactionNetwork()
    network.add_species("A", 4)
    network.add_species("B", 2)
    network.add_reaction(["A", "B"], ["B"], 0.5)
    network.add_reaction({"A": 2}, [], 1.0)
    np.testing.assert_array_equal(network.stoichiometry(), [[-1, 0], [-2, 0]])
    # homodimère : x(x−1)
    np.testing.assert_allclose(network.propensities([4, 2]), [4.0, 12.0])
    np.testing.assert_allclose(network.rates([4.0, 2.0]), [4.0, 16.0])


def test_pulse_gates_rate():
    pulse = Pulse(1.0, 0.5)
    assert pulse.factor(0.9) == 0.0
    assert pulse.factor(1.2) == pytest.approx(2.0)
    assert pulse.factor(1.5) == 0.0
    with pytest.raises(NetworkError):
        Pulse(0.0, 0.0)


# =============================================================================
# SOLVEURS
# =============================================================================

def test_integrate_ode_reaches_steady_state():
    result = integrate_ode(_birth_death(), t_end=100.0)
    assert result.steady_time is not None
    assert result.final["Y"] == pytest.approx(5.0, rel=1e-6)
    assert result.trajectory("Y")[0] == 0.0


def test_integrate_ode_timeout():
    with pytest.raises(SteadyStateTimeout):
        integrate_ode(_birth_death(), t_end=0.5)
    result = integrate_ode(_birth_death(), t_end=0.5, require_steady=False)
    assert result.steady_time is None
    assert result.steady_state is None


def test_ssa_stationary_mean_matches_ode():
    """Naissance-mort : loi stationnaire de Poisson de moyenne 20."""
    rng = make_rng(31)
    runs = 200
    finals = np.array([simulate_ssa(_birth_death(20.0, 1.0), 10.0, rng).at(10.0)["Y"] for _ in range(runs)])
    assert abs(finals.mean() - 20.0) < 4 * math.sqrt(20.0 / runs)


def test_ssa_requires_integer_counts():
    with pytest.raises(NetworkError):
        simulate_ssa(_birth_death(start=0.5), 1.0, make_rng(0))


def test_ssa_pulse_releases_expected_amount():
    network = ReactionNetwork("pulse")
    network.add_species("A", 0)
    network.add_reaction([], ["A"], 50.0, trigger=Pulse(1.0, 0.01))
    rng = make_rng(32)
    totals = [simulate_ssa(network, 2.0, rng, record=False).final["A"] for _ in range(400)]
    assert np.mean(totals) == pytest.approx(50.0, abs=4 * math.sqrt(50.0 / 400))


# =============================================================================
# COMPARATEUR
# =============================================================================

@pytest.mark.parametrize("n_y,n_x,n_neg,expected", [
    (10, 7, 0, 1),
    (7, 10, 0, 0),
    (5, 5, 0, 0),
    (10, 3, 8, 0),
    (12, 3, 8, 1),
])
def test_comparator(n_y, n_x, n_neg, expected):
    assert comparator_decide(n_y, n_x, n_neg) == expected
    assert run_comparator(n_y, n_x, make_rng(n_y * 100 + n_x), n_y_negative=n_neg) == expected


# =============================================================================
# RÉCEPTEURS
# =============================================================================

@pytest.mark.parametrize("kind", ALL_KINDS)
def test_every_design_is_reachable(kind):
    design = receptor_design(kind, kpr=10.0)
    assert design.reachable_states() == set(design.states)
    assert design.emitting_transitions() or design.state_emissions


def test_proofreading_designs_need_rate():
    with pytest.raises(DomainError):
        receptor_design(StatisticKind.RATIO)
    with pytest.raises(DomainError):
        receptor_design(StatisticKind.SIGNAL_CONC)


def test_emitted_species():
    assert receptor_design(StatisticKind.BOUND_COUNT).emitted_species() == ["M"]
    assert receptor_design(StatisticKind.TOTAL_CONC).emitted_species() == ["R", "S"]
    assert receptor_design(StatisticKind.RATIO, kpr=10.0).emitted_species() == ["D1", "D2", "R"]
    assert receptor_design(StatisticKind.SIGNAL_CONC, kpr=10.0).emitted_species() == ["D1", "D2", "S"]


def test_kpr_rate():
    assert kpr_rate(0.06, 0.6) == pytest.approx(10.0)
    with pytest.raises(DomainError):
        kpr_rate(0.0)


def test_bound_count_walk_emits_with_bound_probability(reference_scenario):
    s = reference_scenario
    design = receptor_design(StatisticKind.BOUND_COUNT)
    rng = make_rng(41)
    walks = 4000
    emitted = sum(walk_receptor(design, 2.0, 5.0, s.spec_s, s.spec_in, rng).emissions["M"] for _ in range(walks))
    p_b = bound_probability(2.0, 5.0, s.spec_s, s.spec_in)
    assert emitted / walks == pytest.approx(p_b, abs=4 * math.sqrt(p_b * (1 - p_b) / walks))


def test_total_conc_walk_samples_one_unbound_interval(reference_scenario):
    s = reference_scenario
    design = receptor_design(StatisticKind.TOTAL_CONC, s_rate=1.0)
    rng = make_rng(42)
    walks = [walk_receptor(design, 2.0, 5.0, s.spec_s, s.spec_in, rng) for _ in range(3000)]
    assert all(w.emissions["R"] == 1 for w in walks)
    unbound = np.array([w.unbound_time for w in walks])
    rate = 20.0 * 7.0
    assert unbound.mean() == pytest.approx(1.0 / rate, rel=4 / math.sqrt(len(walks)))
    assert all(w.path[-1] in design.rest_states for w in walks)


def test_ratio_walk_proofreading_split(reference_scenario):
    """Une liaison finit en D1 avec probabilité E[exp(−β τ)]."""
    s = reference_scenario
    beta = 10.0
    design = receptor_design(StatisticKind.RATIO, kpr=beta)
    rng = make_rng(43)
    walks = [walk_receptor(design, 2.0, 5.0, s.spec_s, s.spec_in, rng) for _ in range(4000)]
    assert all(w.emissions["R"] == 1 and w.emissions["D1"] + w.emissions["D2"] == 1 for w in walks)
    alpha_s = 2.0 / 7.0
    expected = alpha_s * 10.0 / (10.0 + beta) + (1 - alpha_s) * 50.0 / (50.0 + beta)
    d1 = np.mean([w.emissions["D1"] for w in walks])
    assert d1 == pytest.approx(expected, abs=4 * math.sqrt(expected * (1 - expected) / len(walks)))


def test_transduce_ideal_and_amplified(reference_scenario, reference_scheme):
    obs = sample_symbol(reference_scenario, 1, make_rng(44), t1=reference_scheme.t1)
    ratio = transduce_observation(receptor_design(StatisticKind.RATIO, kpr=10.0), obs, mode=TransductionMode.IDEAL)
    assert (ratio["D1"], ratio["D2"]) == obs.bin_counts
    assert ratio["R"] == obs.n_samples
    total = transduce_observation(receptor_design(StatisticKind.TOTAL_CONC), obs, amplification=1000.0)
    assert total["S"] == round(1000.0 * obs.total_unbound_time)
    assert transduce_observation(receptor_design(StatisticKind.BOUND_COUNT), obs)["M"] == obs.n_bound
    with pytest.raises(DomainError):
        transduce_observation(receptor_design(StatisticKind.BOUND_COUNT), obs, amplification=0.5)


def test_transduce_kpr_needs_durations(small_scenario):
    obs = sample_symbol(small_scenario, 0, make_rng(45), keep_durations=False)
    with pytest.raises(DomainError):
        transduce_observation(receptor_design(StatisticKind.RATIO, kpr=10.0), obs, rng=make_rng(1))


# =============================================================================
# RÉSEAUX DE CALCUL
# =============================================================================

def test_choose_threshold_amplification():
    assert choose_threshold_amplification(0.3) == 1000.0
    assert choose_threshold_amplification(7.2) == 100.0
    assert choose_threshold_amplification(8500.0) == 1.0


def test_threshold_count_is_floored(reference_scenario, reference_scheme):
    params = DetectorParameters.for_detector(reference_scenario, reference_scheme, 7.25, threshold_amplification=100)
    assert params.threshold_count == 725
    params = DetectorParameters.for_detector(reference_scenario, reference_scheme, 0.30499)
    assert params.threshold_amplification == 1000.0
    assert params.threshold_count == 304


def test_total_conc_network_steady_state(reference_scenario, reference_scheme):
    design = receptor_design(StatisticKind.TOTAL_CONC)
    params = DetectorParameters.for_detector(reference_scenario, reference_scheme, 7.2, threshold_amplification=100,
                                             s_amplification=1000)
    counts = {"R": 10000, "S": 71429}
    network = build_network(design, counts, params)
    final = integrate_ode(network, t_end=1.0).final
    expected = analytic_steady_state(design, counts, params)
    assert expected == pytest.approx(100 * 10000 / (0.02 * 71429))
    assert final["Y"] - final["Yn"] == pytest.approx(expected, rel=1e-6)


@pytest.mark.parametrize("kind", [StatisticKind.RATIO, StatisticKind.SIGNAL_CONC])
def test_dual_rail_network_steady_state(reference_scenario, reference_scheme, kind):
    design = receptor_design(kind, kpr=10.0)
    params = DetectorParameters.for_detector(reference_scenario, reference_scheme, 1.0, threshold_amplification=1000,
                                             s_amplification=1000)
    counts = {"R": 10000, "S": 71429, "D1": 8000, "D2": 2000}
    network = build_network(design, counts, params)
    assert any(r.products.get("Yn") for r in network.reactions)
    final = integrate_ode(network, t_end=1.0).final
    assert final["Y"] >= 0 and final["Yn"] >= 0
    assert final["Y"] - final["Yn"] == pytest.approx(analytic_steady_state(design, counts, params), rel=1e-6)


def test_build_network_missing_count(reference_scenario, reference_scheme):
    params = DetectorParameters.for_detector(reference_scenario, reference_scheme, 7.0)
    with pytest.raises(NetworkError):
        build_network(receptor_design(StatisticKind.TOTAL_CONC), {"R": 10}, params)


def test_bound_count_network_decision_is_exact(reference_scenario, reference_scheme):
    design = receptor_design(StatisticKind.BOUND_COUNT)
    params = DetectorParameters.for_detector(reference_scenario, reference_scheme, 8700.4,
                                             threshold_amplification=1.0)
    assert network_decision(design, {"M": 8700}, params) == 0
    assert network_decision(design, {"M": 8701}, params) == 1


# =============================================================================
# ACTIVATION
# =============================================================================

def test_activation_network_switches_on_then_off(reference_scenario):
    params = ActivationParameters.for_scenario(reference_scenario, bit=1)
    assert params.psi_minus > params.psi_plus
    network = build_activation_network(0.001, 0.01, params)
    result = integrate_ode(network, t_end=0.02, require_steady=False)
    plus = result.trajectory("A+")
    assert plus.max() == pytest.approx(1.0, rel=1e-6)
    assert plus[result.t < 0.001].max() == 0.0
    assert result.final["A+"] < 1e-6
    assert result.final["A-"] == pytest.approx(1.0, rel=1e-6)


def test_activation_network_rejects_overlapping_pulses(reference_scenario):
    params = ActivationParameters.for_scenario(reference_scenario)
    with pytest.raises(DomainError):
        build_activation_network(0.001, 0.001, params)
