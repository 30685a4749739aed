# -*- coding: utf-8 -*-
"""
Génération stochastique des observations des récepteurs, symbole par symbole.

Chaque période symbole tire un nombre d'interférents (Poisson), puis un
échantillon par récepteur : l'état lié/libre à l'instant d'échantillonnage,
une durée libre complète et une durée liée complète. Les statistiques sont
tirées directement des lois d'équilibre ; ``simulate_trajectory`` garde le
processus événementiel complet pour les vérifications croisées.

Les générateurs sont des ``Generator(Philox)`` numpy indexés par
``SeedSequence(seed, spawn_key=...)`` : tout bloc d'essais se régénère
indépendamment de l'ordonnancement.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from typing import List, NamedTuple, Optional, Sequence

import numpy as np

from src.core.binding.kinetics import (
    DEFAULT_NU,
    LigandRole,
    LigandSpec,
    bound_probability,
    default_time_threshold,
    equilibrium_distribution,
)
from src.core.errors import DomainError, ScenarioError

logger = logging.getLogger(__name__)

# Reference parameter set (canonical units)
REFERENCE_K_ON = 20.0            # μm³/s
REFERENCE_K_OFF_SIGNAL = 10.0    # 1/s
REFERENCE_AFFINITY_RATIO = 0.2   # k_off(signal) / k_off(interferer)
REFERENCE_VOLUME = 4000.0        # μm³
REFERENCE_RECEPTORS = 10_000
REFERENCE_BIT0_KD = 4.0          # c_bit0 / K_D(signal)
REFERENCE_BIT1_KD = 5.0
REFERENCE_INTERFERER_KD = 2.0    # mean c_in / K_D(interferer)


def make_rng(seed: int, *key: int) -> np.random.Generator:
    """Générateur à compteur du sous-flux ``key`` de ``seed``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=tuple(key))))


# =============================================================================
# SCENARIO
# =============================================================================

@dataclass(frozen=True)
class ChannelScenario:
    """
    Un cadre de transmission.

    Attributes:
        c_bit0: Concentration du signal pour le bit 0 (μm⁻³)
        c_bit1: Concentration du signal pour le bit 1 (μm⁻³)
        mean_c_in: Concentration moyenne de l'interférent (μm⁻³)
        volume: Volume de l'espace de réception (μm³)
        n_receptors: Nombre de récepteurs, donc d'échantillons par symbole
        spec_s: Cinétique du ligand signal
        spec_in: Cinétique du ligand interférent
    """
    c_bit0: float
    c_bit1: float
    mean_c_in: float
    volume: float
    n_receptors: int
    spec_s: LigandSpec
    spec_in: LigandSpec

    def __post_init__(self):
        for name in ("c_bit0", "c_bit1", "mean_c_in", "volume"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ScenarioError(f"{name} must be finite, got {value!r}")
        if self.c_bit0 <= 0:
            raise ScenarioError(f"c_bit0 must be > 0, got {self.c_bit0}")
        if self.c_bit1 < self.c_bit0:
            raise ScenarioError(f"c_bit1 ({self.c_bit1}) must not be below c_bit0 ({self.c_bit0})")
        if self.c_bit1 == self.c_bit0:
            logger.warning("c_bit0 == c_bit1: bits are indistinguishable, detection reduces to guessing")
        if self.mean_c_in < 0:
            raise ScenarioError(f"mean_c_in must be >= 0, got {self.mean_c_in}")
        if self.volume <= 0:
            raise ScenarioError(f"volume must be > 0, got {self.volume}")
        if int(self.n_receptors) != self.n_receptors or self.n_receptors < 3:
            raise ScenarioError(f"n_receptors must be an integer >= 3, got {self.n_receptors}")
        if not math.isclose(self.spec_s.k_on, self.spec_in.k_on, rel_tol=1e-12):
            raise ScenarioError("signal and interferer binding rates must be equal")

    @classmethod
    def reference(
        cls,
        k_on: float = REFERENCE_K_ON,
        k_off_signal: float = REFERENCE_K_OFF_SIGNAL,
        affinity_ratio: float = REFERENCE_AFFINITY_RATIO,
        volume: float = REFERENCE_VOLUME,
        n_receptors: int = REFERENCE_RECEPTORS,
        bit0_kd: float = REFERENCE_BIT0_KD,
        bit1_kd: float = REFERENCE_BIT1_KD,
        interferer_kd: float = REFERENCE_INTERFERER_KD,
    ) -> 'ChannelScenario':
        """
        Scénario de référence, concentrations exprimées en constantes de dissociation.

        Par défaut : c_bit0 = 2, c_bit1 = 2.5 et mean_c_in = 5 molécules/μm³.
        """
        spec_s = LigandSpec(k_on, k_off_signal, LigandRole.SIGNAL)
        spec_in = LigandSpec(k_on, k_off_signal / affinity_ratio, LigandRole.INTERFERER)
        kd_s = spec_s.dissociation_constant
        return cls(
            c_bit0=bit0_kd * kd_s,
            c_bit1=bit1_kd * kd_s,
            mean_c_in=interferer_kd * spec_in.dissociation_constant,
            volume=volume,
            n_receptors=n_receptors,
            spec_s=spec_s,
            spec_in=spec_in,
        )

    # ------------------------------------------------------------------
    # Derived quantities
    # ------------------------------------------------------------------

    @property
    def k_on(self) -> float:
        return self.spec_s.k_on

    @property
    def mean_n_in(self) -> int:
        """Nombre moyen d'interférents, floor(mean_c_in · volume)."""
        return int(math.floor(self.mean_c_in * self.volume))

    def signal_concentration(self, bit: int) -> float:
        if bit not in (0, 1):
            raise DomainError(f"bit must be 0 or 1, got {bit!r}")
        return self.c_bit1 if bit else self.c_bit0

    def saturation(self) -> tuple:
        """Probabilité liée pour les bits 0 et 1 au nombre moyen d'interférents."""
        c_in = self.mean_n_in / self.volume
        return tuple(
            bound_probability(self.signal_concentration(bit), c_in, self.spec_s, self.spec_in)
            for bit in (0, 1)
        )

    # ------------------------------------------------------------------
    # Variants
    # ------------------------------------------------------------------

    def with_affinity_ratio(self, eta: float) -> 'ChannelScenario':
        """Passe k_off(interférent) à k_off(signal)/eta, à concentrations constantes."""
        if eta <= 0:
            raise ScenarioError(f"affinity ratio must be > 0, got {eta}")
        return replace(self, spec_in=self.spec_in.with_k_off(self.spec_s.k_off / eta))

    def with_bit_ratio(self, ratio: float) -> 'ChannelScenario':
        """Fixe c_bit0 = ratio · c_bit1 sans toucher c_bit1."""
        return replace(self, c_bit0=ratio * self.c_bit1)

    def with_interferer_level(self, multiple_of_kd: float) -> 'ChannelScenario':
        return replace(self, mean_c_in=multiple_of_kd * self.spec_in.dissociation_constant)

    def with_receptors(self, n_receptors: int) -> 'ChannelScenario':
        return replace(self, n_receptors=int(n_receptors))

    def to_dict(self) -> dict:
        return {
            'c_bit0': self.c_bit0,
            'c_bit1': self.c_bit1,
            'mean_c_in': self.mean_c_in,
            'volume': self.volume,
            'n_receptors': self.n_receptors,
            'k_on': self.k_on,
            'k_off_signal': self.spec_s.k_off,
            'k_off_interferer': self.spec_in.k_off,
        }


# =============================================================================
# OBSERVATIONS
# =============================================================================

@dataclass
class ReceptorObservation:
    """
    Statistiques des récepteurs pour un symbole.

    ``bound_durations`` vaut ``None`` quand l'observation a été tirée en mode
    résumé (comptes et sommes seulement).
    """
    n_bound: int
    total_unbound_time: float
    bin_counts: tuple
    n_in_realized: int
    n_samples: int
    bound_durations: Optional[np.ndarray] = None


@dataclass
class ObservationBatch:
    """Statistiques en colonnes pour de nombreux symboles."""
    bits: np.ndarray
    n_in: np.ndarray
    n_bound: np.ndarray
    total_unbound_time: np.ndarray
    bin_counts: np.ndarray      # shape (n_symbols, 2)
    n_samples: int

    def __len__(self) -> int:
        return len(self.bits)

    def observation(self, index: int) -> ReceptorObservation:
        return ReceptorObservation(
            n_bound=int(self.n_bound[index]),
            total_unbound_time=float(self.total_unbound_time[index]),
            bin_counts=(int(self.bin_counts[index, 0]), int(self.bin_counts[index, 1])),
            n_in_realized=int(self.n_in[index]),
            n_samples=self.n_samples,
        )


def draw_interferer_count(mean_c_in: float, volume: float, rng: np.random.Generator, size=None):
    """Nombre d'interférents poissonnien de moyenne floor(mean_c_in · volume)."""
    if mean_c_in < 0:
        raise DomainError(f"mean_c_in must be >= 0, got {mean_c_in}")
    mean = math.floor(mean_c_in * volume)
    draw = rng.poisson(mean, size=size)
    return int(draw) if size is None else draw


def _first_bin_probability(alpha_s, scenario: ChannelScenario, t1: float):
    p_s = -math.expm1(-scenario.spec_s.k_off * t1)
    p_in = -math.expm1(-scenario.spec_in.k_off * t1)
    return alpha_s * p_s + (1.0 - alpha_s) * p_in


def sample_symbols(
    scenario: ChannelScenario,
    bits: Sequence[int],
    rng: np.random.Generator,
    t1: Optional[float] = None,
    n_in: Optional[int] = None,
) -> ObservationBatch:
    """
    Tire d'un coup les statistiques des récepteurs pour de nombreux symboles.

    La somme des N durées libres exponentielles est tirée selon une loi Gamma
    et les comptes de bins selon une binomiale, qui sont leurs lois exactes.

    Args:
        scenario: Cadre de transmission
        bits: Bits émis
        rng: Générateur
        t1: Frontière des bins (nu/k_off(interférent) avec nu = 3 par défaut)
        n_in: Nombre d'interférents imposé au lieu d'un tirage de Poisson

    Raises:
        ScenarioError: Si un symbole a une concentration totale nulle
    """
    bits = np.asarray(bits, dtype=np.int64)
    if np.any((bits != 0) & (bits != 1)):
        raise DomainError("bits must be 0 or 1")
    size = bits.shape[0]
    n = scenario.n_receptors
    t1 = default_time_threshold(scenario.spec_in, DEFAULT_NU) if t1 is None else t1

    if n_in is None:
        counts_in = draw_interferer_count(scenario.mean_c_in, scenario.volume, rng, size=size)
    else:
        counts_in = np.full(size, int(n_in), dtype=np.int64)

    c_s = np.where(bits == 1, scenario.c_bit1, scenario.c_bit0)
    c_in = counts_in / scenario.volume
    c_tot = c_s + c_in
    if np.any(c_tot <= 0):
        raise ScenarioError("total concentration is zero: unbound intervals are undefined")

    p_b = bound_probability(c_s, c_in, scenario.spec_s, scenario.spec_in)
    n_bound = rng.binomial(n, p_b)
    total_unbound = rng.gamma(shape=n, scale=1.0 / (scenario.k_on * c_tot))
    alpha_s = c_s / c_tot
    n_b1 = rng.binomial(n, _first_bin_probability(alpha_s, scenario, t1))

    return ObservationBatch(
        bits=bits,
        n_in=np.asarray(counts_in, dtype=np.int64),
        n_bound=np.asarray(n_bound, dtype=np.int64),
        total_unbound_time=np.asarray(total_unbound, dtype=float),
        bin_counts=np.column_stack([n_b1, n - n_b1]).astype(np.int64),
        n_samples=n,
    )


def sample_symbol(
    scenario: ChannelScenario,
    bit: int,
    rng: np.random.Generator,
    t1: Optional[float] = None,
    keep_durations: bool = True,
    n_in: Optional[int] = None,
) -> ReceptorObservation:
    """
    Tire les statistiques des récepteurs pour un symbole.

    Avec ``keep_durations``, la durée libre et la durée liée de chaque
    récepteur sont tirées explicitement et conservées ; sinon l'échantillonneur
    par lot est utilisé pour un seul symbole.

    Raises:
        ScenarioError: Si la concentration totale est nulle
    """
    if not keep_durations:
        return sample_symbols(scenario, [bit], rng, t1=t1, n_in=n_in).observation(0)

    n = scenario.n_receptors
    t1 = default_time_threshold(scenario.spec_in, DEFAULT_NU) if t1 is None else t1
    c_s = scenario.signal_concentration(bit)
    count_in = draw_interferer_count(scenario.mean_c_in, scenario.volume, rng) if n_in is None else int(n_in)
    c_in = count_in / scenario.volume
    c_tot = c_s + c_in
    if c_tot <= 0:
        raise ScenarioError("total concentration is zero: unbound intervals are undefined")

    n_bound = int(rng.binomial(n, bound_probability(c_s, c_in, scenario.spec_s, scenario.spec_in)))
    unbound = rng.exponential(1.0 / (scenario.k_on * c_tot), size=n)
    is_signal = rng.random(n) < c_s / c_tot
    rates = np.where(is_signal, scenario.spec_s.k_off, scenario.spec_in.k_off)
    durations = rng.exponential(1.0, size=n) / rates
    n_b1 = int(np.count_nonzero(durations < t1))

    return ReceptorObservation(
        n_bound=n_bound,
        total_unbound_time=float(unbound.sum()),
        bin_counts=(n_b1, n - n_b1),
        n_in_realized=count_in,
        n_samples=n,
        bound_durations=durations,
    )


# =============================================================================
# FULL RECEPTOR TRAJECTORY
# =============================================================================

class ReceptorEvent(NamedTuple):
    """Un séjour du récepteur dans un état."""
    start: float
    duration: float
    bound: bool
    ligand: Optional[LigandRole]
    complete: bool


@dataclass
class ReceptorTrajectory:
    """Séjours libres et liés alternés d'un récepteur."""
    events: List[ReceptorEvent] = field(default_factory=list)
    duration: float = 0.0

    def fraction_bound(self) -> float:
        bound = sum(e.duration for e in self.events if e.bound)
        return bound / self.duration if self.duration > 0 else 0.0

    def bound_durations(self, complete_only: bool = True) -> np.ndarray:
        return np.array([
            e.duration for e in self.events
            if e.bound and (e.complete or not complete_only) and e.start > 0
        ])

    def unbound_durations(self, complete_only: bool = True) -> np.ndarray:
        return np.array([
            e.duration for e in self.events
            if not e.bound and (e.complete or not complete_only) and e.start > 0
        ])

    def binding_ligands(self) -> List[LigandRole]:
        return [e.ligand for e in self.events if e.bound]


def simulate_trajectory(
    scenario: ChannelScenario,
    bit: int,
    duration: float,
    rng: np.random.Generator,
    n_in: Optional[int] = None,
) -> ReceptorTrajectory:
    """
    Simulation événementielle du processus à 3 états d'un récepteur.

    L'état initial suit la distribution stationnaire. Le premier séjour et celui
    coupé à ``duration`` sont marqués (début 0 / incomplet) pour que les
    statistiques de durée puissent les exclure.
    """
    if duration <= 0:
        raise DomainError("duration must be > 0")
    c_s = scenario.signal_concentration(bit)
    count_in = draw_interferer_count(scenario.mean_c_in, scenario.volume, rng) if n_in is None else int(n_in)
    c_in = count_in / scenario.volume
    spec_s, spec_in = scenario.spec_s, scenario.spec_in
    on_s = spec_s.k_on * c_s
    on_in = spec_in.k_on * c_in
    on_total = on_s + on_in

    eq = equilibrium_distribution(c_s, c_in, spec_s, spec_in)
    start_state = rng.choice(3, p=eq.as_array())
    bound = start_state != 0
    ligand = {0: None, 1: LigandRole.SIGNAL, 2: LigandRole.INTERFERER}[int(start_state)]

    trajectory = ReceptorTrajectory(duration=duration)
    t = 0.0
    while t < duration:
        if bound:
            k_off = spec_s.k_off if ligand is LigandRole.SIGNAL else spec_in.k_off
            dwell = rng.exponential(1.0 / k_off)
        elif on_total > 0:
            dwell = rng.exponential(1.0 / on_total)
        else:
            dwell = math.inf
        complete = t + dwell <= duration
        trajectory.events.append(ReceptorEvent(t, min(dwell, duration - t), bound, ligand, complete))
        t += dwell
        if bound:
            bound, ligand = False, None
        else:
            bound = True
            ligand = LigandRole.SIGNAL if rng.random() * on_total < on_s else LigandRole.INTERFERER
    return trajectory
