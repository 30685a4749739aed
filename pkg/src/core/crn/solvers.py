# -*- coding: utf-8 -*-
"""
Simulation déterministe et stochastique des réseaux de réactions.

``integrate_ode`` intègre les équations cinétiques avec le DOP853 adaptatif
de scipy et s'arrête dès que l'état est stationnaire. ``simulate_ssa`` exécute
la simulation stochastique par méthode directe. Les deux coupent le temps aux
bords des impulsions, ce qui traite exactement les réactions déclenchées.
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Optional

import numpy as np
from scipy.integrate import solve_ivp

from src.core.crn.network import ReactionNetwork
from src.core.errors import NetworkError, NumericError, SteadyStateTimeout

logger = logging.getLogger(__name__)

DEFAULT_RTOL = 1e-9
DEFAULT_ATOL = 1e-12
STEADY_TOLERANCE = 1e-9
NEGATIVE_SLACK = 1e-6


@dataclass
class OdeResult:
    """Trajectoire des équations cinétiques et état stationnaire atteint."""
    species: List[str]
    t: np.ndarray
    y: np.ndarray                  # shape (n_species, n_times)
    steady_time: Optional[float]

    @property
    def final(self) -> Dict[str, float]:
        return dict(zip(self.species, self.y[:, -1].tolist()))

    @property
    def steady_state(self) -> Optional[Dict[str, float]]:
        return self.final if self.steady_time is not None else None

    def trajectory(self, name: str) -> np.ndarray:
        return self.y[self.species.index(name)]


@dataclass
class SsaTrajectory:
    """Instants des événements et comptes d'une exécution stochastique."""
    species: List[str]
    times: np.ndarray
    counts: np.ndarray             # shape (n_records, n_species)
    n_events: int

    @property
    def final(self) -> Dict[str, int]:
        return dict(zip(self.species, (int(v) for v in self.counts[-1])))

    def at(self, t: float) -> Dict[str, int]:
        row = max(0, int(np.searchsorted(self.times, t, side="right")) - 1)
        return dict(zip(self.species, (int(v) for v in self.counts[row])))


def _is_stationary(f, t: float, y: np.ndarray, tolerance: float) -> bool:
    return np.linalg.norm(f(t, y)) <= tolerance * np.linalg.norm(y)


def integrate_ode(
    network: ReactionNetwork,
    t_end: float,
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
    steady_tolerance: float = STEADY_TOLERANCE,
    require_steady: bool = True,
) -> OdeResult:
    """
    Intègre les équations cinétiques jusqu'à l'état stationnaire ou ``t_end``.

    L'état est déclaré stationnaire dès que ||dn/dt|| < steady_tolerance·||n||
    après le dernier bord d'impulsion.

    Raises:
        NumericError: Si un compte devient nettement négatif
        SteadyStateTimeout: Si ``require_steady`` et aucun état stationnaire atteint
    """
    y0 = network.initial_state()
    if np.any(y0 < 0):
        raise NumericError("initial counts must be >= 0")
    f = network.compile()
    edges = [e for e in network.pulse_edges() if 0.0 < e < t_end]
    bounds = [0.0] + edges + [t_end]
    last_edge = edges[-1] if edges else 0.0

    def residual(t, y):
        return np.linalg.norm(f(t, y)) - steady_tolerance * np.linalg.norm(y)

    residual.terminal = True
    residual.direction = -1

    times = [np.array([0.0])]
    states = [y0[:, None]]
    y = y0
    steady_time = None
    for a, b in zip(bounds[:-1], bounds[1:]):
        final_segment = a >= last_edge
        if final_segment and _is_stationary(f, a, y, steady_tolerance):
            steady_time = a
            break
        solution = solve_ivp(
            f, (a, b), y, method="DOP853", rtol=rtol, atol=atol,
            events=residual if final_segment else None,
        )
        if not solution.success:
            raise NumericError(f"integration failed on [{a}, {b}]: {solution.message}")
        times.append(solution.t[1:])
        states.append(solution.y[:, 1:])
        y = solution.y[:, -1]
        if final_segment and solution.status == 1:
            steady_time = float(solution.t[-1])
            break

    t = np.concatenate(times)
    trajectory = np.concatenate(states, axis=1)
    floor = -NEGATIVE_SLACK * max(1.0, float(np.abs(trajectory).max()))
    if trajectory.min() < floor:
        raise NumericError(f"negative count {trajectory.min():.3e} in {network.name}")
    trajectory = np.clip(trajectory, 0.0, None)

    if steady_time is None and require_steady:
        raise SteadyStateTimeout(f"{network.name}: no steady state before t={t_end}")
    if steady_time is not None:
        logger.debug("%s: steady state at t=%.6g", network.name, steady_time)
    return OdeResult(network.species_names, t, trajectory, steady_time)


def simulate_ssa(
    network: ReactionNetwork,
    t_end: float,
    rng: np.random.Generator,
    max_events: int = 10_000_000,
    record: bool = True,
) -> SsaTrajectory:
    """
    Simulation stochastique par méthode directe.

    Tourne jusqu'à ``t_end`` ou jusqu'à ce qu'aucune réaction ne puisse se
    produire (``t_end`` peut valoir ``math.inf`` pour les réseaux qui s'épuisent).

    Raises:
        NetworkError: Si les comptes initiaux ne sont pas entiers
        NumericError: Si ``max_events`` est dépassé
    """
    x0 = network.initial_state()
    if np.any(np.abs(x0 - np.round(x0)) > 0):
        raise NetworkError("stochastic simulation needs integer initial counts")
    x = np.round(x0).astype(np.int64)
    stoich = network.stoichiometry().astype(np.int64)
    edges = [e for e in network.pulse_edges() if e > 0.0]

    times = [0.0]
    counts = [x.copy()]
    t = 0.0
    n_events = 0
    while t < t_end:
        next_edge = next((e for e in edges if e > t), math.inf)
        horizon = min(next_edge, t_end)
        a = network.propensities(x, t)
        a0 = a.sum()
        if a0 <= 0:
            if math.isinf(horizon):
                break
            t = horizon
            continue
        tau = rng.exponential(1.0 / a0)
        if t + tau >= horizon:
            t = horizon
            continue
        t += tau
        j = int(np.searchsorted(np.cumsum(a), rng.random() * a0, side="right"))
        x = x + stoich[min(j, len(a) - 1)]
        n_events += 1
        if n_events > max_events:
            raise NumericError(f"{network.name}: more than {max_events} events")
        if record:
            times.append(t)
            counts.append(x.copy())

    if not record:
        times.append(min(t, t_end))
        counts.append(x.copy())
    return SsaTrajectory(network.species_names, np.array(times), np.array(counts), n_events)


# =============================================================================
# COMPARATOR
# =============================================================================

def comparator_decide(n_y: float, n_x: float, n_y_negative: float = 0.0) -> int:
    """
    Issue de l'annihilation complète de Y contre X (et Y-).

    Bit 1 seulement si des Y survivent, c'est-à-dire si Y dépasse X + Y- ; l'égalité donne 0.
    """
    return int(n_y > n_x + n_y_negative)


def build_comparator_network(n_y: int, n_x: int, n_y_negative: int = 0, rate: float = 1.0) -> ReactionNetwork:
    """Y + X -> 0 et Y + Y- -> 0, tous deux au taux ``rate``."""
    network = ReactionNetwork("comparator")
    network.add_species("Y", n_y)
    network.add_species("Yn", n_y_negative)
    network.add_species("X", n_x)
    network.add_reaction(["Y", "X"], [], rate, label="threshold")
    network.add_reaction(["Y", "Yn"], [], rate, label="dual-rail")
    return network


def run_comparator(
    n_y: int,
    n_x: int,
    rng: np.random.Generator,
    n_y_negative: int = 0,
    rate: float = 1.0,
) -> int:
    """Simule le comparateur jusqu'à épuisement et lit les espèces survivantes."""
    network = build_comparator_network(n_y, n_x, n_y_negative, rate)
    final = simulate_ssa(network, math.inf, rng, record=False).final
    return int(final["Y"] > 0)
