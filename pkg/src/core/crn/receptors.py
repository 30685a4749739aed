# -*- coding: utf-8 -*-
"""
Machines à états des récepteurs et réseaux de réactions qui calculent chaque statistique.

Chaque détecteur a son design de récepteur : états inactifs (``U``/``U_I`` et
``B_I``), états activés atteints sur le signal d'activation A+, sous-états
de relecture cinétique optionnels, et molécules émises sur certaines
transitions. ``transduce_observation`` traduit une observation en comptes de
molécules intracellulaires libérées par le design ; ``build_network`` branche
ces comptes dans le réseau de calcul dont l'état stationnaire est la
statistique, et le comparateur en tire un bit.

Les poids de production négatifs passent par une seconde espèce ``Yn``
(double rail) : la quantité nette ``Y - Yn`` suit exactement l'équation
linéaire, et le comparateur fait annihiler ``Yn`` avec ``Y`` comme l'espèce seuil X.
"""

import logging
import math
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, FrozenSet, List, Mapping, Optional, Tuple

import numpy as np

from src.core.binding.kinetics import LigandRole, LigandSpec, correlation_time, equilibrium_distribution
from src.core.binding.sampler import ChannelScenario, ReceptorObservation
from src.core.crn.network import Pulse, ReactionNetwork
from src.core.crn.solvers import comparator_decide
from src.core.detection.detectors import StatisticKind
from src.core.detection.estimators import BinningScheme
from src.core.errors import DomainError, NetworkError, NumericError

logger = logging.getLogger(__name__)

DEFAULT_KAPPA = 0.6
DEFAULT_S_RATE = 1.0
FAST_RATE_FACTOR = 1e3
PULSE_WIDTH_FACTOR = 1e-3
MIN_THRESHOLD_COUNT = 100
MAX_WALK_STEPS = 10_000


class Stimulus(Enum):
    """Ce qui déclenche une transition du récepteur."""
    BIND = "bind"
    UNBIND = "unbind"
    ACTIVATE = "A+"
    KPR = "kpr"


class TransductionMode(Enum):
    """Répartition des durées liées en molécules D1/D2."""
    KPR = "kpr"         # stochastic proofreading: D1 with probability exp(-beta·tau)
    IDEAL = "ideal"     # exact time threshold: D1 = n_b1, D2 = n_b2


# =============================================================================
# RECEPTOR DESIGNS
# =============================================================================

@dataclass(frozen=True)
class Transition:
    source: str
    target: str
    stimulus: Stimulus
    rate: Optional[float] = None
    emissions: Tuple[Tuple[str, int], ...] = ()


@dataclass(frozen=True)
class ReceptorDesign:
    """
    Machine à états d'un type de récepteur.

    Attributes:
        kind: Détecteur réalisé par ce récepteur
        states: Tous les états
        rest_states: États inactifs (hors fenêtre d'échantillonnage)
        bound_states: États où un ligand est fixé
        transitions: Transitions permises
        state_emissions: Taux de libération continue par état (molécules/s)
        kpr_rate: Taux de relecture beta (None sans relecture)
        sampled_unbound: États dont le séjour forme la durée libre échantillonnée
        sampled_bound: États dont le séjour forme la durée liée échantillonnée
    """
    kind: StatisticKind
    states: Tuple[str, ...]
    rest_states: FrozenSet[str]
    bound_states: FrozenSet[str]
    transitions: Tuple[Transition, ...]
    state_emissions: Mapping[str, Mapping[str, float]] = field(default_factory=dict)
    kpr_rate: Optional[float] = None
    sampled_unbound: FrozenSet[str] = frozenset()
    sampled_bound: FrozenSet[str] = frozenset()

    def __post_init__(self):
        names = set(self.states)
        for t in self.transitions:
            if t.source not in names or t.target not in names:
                raise NetworkError(f"{self.kind.value}: transition {t.source}->{t.target} uses an unknown state")
        unreachable = names - self.reachable_states()
        if unreachable:
            raise NetworkError(f"{self.kind.value}: unreachable states {sorted(unreachable)}")

    def reachable_states(self) -> set:
        seen = set(self.rest_states)
        queue = deque(self.rest_states)
        while queue:
            state = queue.popleft()
            for t in self.transitions:
                if t.source == state and t.target not in seen:
                    seen.add(t.target)
                    queue.append(t.target)
        return seen

    def transitions_from(self, state: str) -> List[Transition]:
        return [t for t in self.transitions if t.source == state]

    def emitting_transitions(self) -> List[Transition]:
        return [t for t in self.transitions if t.emissions]

    def emitted_species(self) -> List[str]:
        names = {name for t in self.transitions for name, _ in t.emissions}
        names.update(name for rates in self.state_emissions.values() for name in rates)
        return sorted(names)


def kpr_rate(t1: float, kappa: float = DEFAULT_KAPPA) -> float:
    """Taux de relecture beta = kappa / t1."""
    if t1 <= 0:
        raise DomainError(f"t1 must be > 0, got {t1}")
    if kappa < 0:
        raise DomainError(f"kappa must be >= 0, got {kappa}")
    return kappa / t1


def receptor_design(
    kind: StatisticKind,
    kpr: Optional[float] = None,
    s_rate: float = DEFAULT_S_RATE,
    activation_rate: Optional[float] = None,
) -> ReceptorDesign:
    """
    Construit le design de récepteur d'un détecteur.

    Args:
        kind: Détecteur
        kpr: Taux de relecture beta, requis pour DRBT et DRUBT
        s_rate: Taux de libération de S dans U_A
        activation_rate: Taux des transitions pilotées par A+ (indicatif ;
            ``walk_receptor`` traite l'activation comme instantanée)
    """
    bind, unbind, act, proof = Stimulus.BIND, Stimulus.UNBIND, Stimulus.ACTIVATE, Stimulus.KPR
    if kind is StatisticKind.BOUND_COUNT:
        return ReceptorDesign(
            kind=kind,
            states=("U", "B_I", "B_A"),
            rest_states=frozenset({"U", "B_I"}),
            bound_states=frozenset({"B_I", "B_A"}),
            transitions=(
                Transition("U", "B_I", bind),
                Transition("B_I", "U", unbind),
                Transition("B_I", "B_A", act, activation_rate),
                Transition("B_A", "U", unbind, emissions=(("M", 1),)),
            ),
            sampled_bound=frozenset({"B_A"}),
        )
    if kind is StatisticKind.TOTAL_CONC:
        return ReceptorDesign(
            kind=kind,
            states=("U_I", "U_A*", "U_A", "B_I", "B_A"),
            rest_states=frozenset({"U_I", "B_I"}),
            bound_states=frozenset({"B_I", "B_A"}),
            transitions=(
                Transition("U_I", "B_I", bind),
                Transition("B_I", "U_I", unbind),
                Transition("U_I", "U_A*", act, activation_rate),
                Transition("B_I", "B_A", act, activation_rate),
                Transition("U_A*", "B_A", bind),
                Transition("B_A", "U_A", unbind),
                Transition("U_A", "B_I", bind, emissions=(("R", 1),)),
            ),
            state_emissions={"U_A": {"S": s_rate}},
            sampled_unbound=frozenset({"U_A"}),
        )

    if kpr is None:
        raise DomainError(f"{kind.value} needs a proofreading rate")
    kpr_states = ("B_A1", "B_A2")
    finishing = (
        Transition("B_A1", "B_A2", proof, kpr),
    )
    if kind is StatisticKind.RATIO:
        return ReceptorDesign(
            kind=kind,
            states=("U_I", "B_I", "B_I*", "U_A") + kpr_states,
            rest_states=frozenset({"U_I", "B_I"}),
            bound_states=frozenset({"B_I", "B_I*", "B_A1", "B_A2"}),
            transitions=(
                Transition("U_I", "B_I", bind),
                Transition("B_I", "U_I", unbind),
                Transition("U_I", "U_A", act, activation_rate),
                Transition("B_I", "B_I*", act, activation_rate),
                Transition("B_I*", "U_A", unbind),
                Transition("U_A", "B_A1", bind),
                Transition("B_A1", "U_I", unbind, emissions=(("R", 1), ("D1", 1))),
                Transition("B_A2", "U_I", unbind, emissions=(("R", 1), ("D2", 1))),
            ) + finishing,
            kpr_rate=kpr,
            sampled_bound=frozenset(kpr_states),
        )
    if kind is StatisticKind.SIGNAL_CONC:
        return ReceptorDesign(
            kind=kind,
            states=("U_I", "B_I", "U_A*", "B_A*", "U_A") + kpr_states,
            rest_states=frozenset({"U_I", "B_I"}),
            bound_states=frozenset({"B_I", "B_A*", "B_A1", "B_A2"}),
            transitions=(
                Transition("U_I", "B_I", bind),
                Transition("B_I", "U_I", unbind),
                Transition("U_I", "U_A*", act, activation_rate),
                Transition("B_I", "B_A*", act, activation_rate),
                Transition("U_A*", "B_A*", bind),
                Transition("B_A*", "U_A", unbind),
                Transition("U_A", "B_A1", bind),
                Transition("B_A1", "U_I", unbind, emissions=(("D1", 1),)),
                Transition("B_A2", "U_I", unbind, emissions=(("D2", 1),)),
            ) + finishing,
            state_emissions={"U_A": {"S": s_rate}},
            kpr_rate=kpr,
            sampled_unbound=frozenset({"U_A"}),
            sampled_bound=frozenset(kpr_states),
        )
    raise NetworkError(f"unknown receptor design: {kind!r}")


# =============================================================================
# SINGLE RECEPTOR WALK
# =============================================================================

@dataclass
class ReceptorWalk:
    """Émissions et durées échantillonnées d'un récepteur sur une fenêtre."""
    path: List[str]
    emissions: Dict[str, float]
    unbound_time: float = 0.0
    bound_duration: float = 0.0


def walk_receptor(
    design: ReceptorDesign,
    c_s: float,
    c_in: float,
    spec_s: LigandSpec,
    spec_in: LigandSpec,
    rng: np.random.Generator,
) -> ReceptorWalk:
    """
    Fait évoluer un récepteur de l'activation jusqu'à son retour à l'inactivité.

    L'état initial suit la distribution stationnaire de liaison et le signal
    d'activation s'applique instantanément. La libération continue de S est
    tirée comme un compte de Poisson sur le séjour dans l'état émetteur.
    """
    eq = equilibrium_distribution(c_s, c_in, spec_s, spec_in)
    start = int(rng.choice(3, p=eq.as_array()))
    ligand = {0: None, 1: LigandRole.SIGNAL, 2: LigandRole.INTERFERER}[start]
    unbound_rest = next(s for s in design.rest_states if s not in design.bound_states)
    bound_rest = next(s for s in design.rest_states if s in design.bound_states)
    state = unbound_rest if ligand is None else bound_rest

    on_total = (c_s + c_in) * spec_s.k_on
    alpha_s = c_s / (c_s + c_in) if c_s + c_in > 0 else 0.0
    walk = ReceptorWalk(path=[state], emissions={name: 0.0 for name in design.emitted_species()})

    activation = [t for t in design.transitions_from(state) if t.stimulus is Stimulus.ACTIVATE]
    if not activation:
        return walk
    state = activation[0].target
    walk.path.append(state)

    continuous: Dict[str, float] = {}
    for _ in range(MAX_WALK_STEPS):
        if state in design.rest_states:
            break
        options = []
        for t in design.transitions_from(state):
            if t.stimulus is Stimulus.BIND:
                rate = on_total
            elif t.stimulus is Stimulus.UNBIND:
                rate = spec_s.k_off if ligand is LigandRole.SIGNAL else spec_in.k_off
            elif t.stimulus is Stimulus.KPR:
                rate = t.rate or 0.0
            else:
                continue
            if rate > 0:
                options.append((rng.exponential(1.0 / rate), t))
        if not options:
            raise NumericError(f"{design.kind.value}: receptor stuck in state {state}")
        dwell, chosen = min(options, key=lambda item: item[0])

        for name, rate in design.state_emissions.get(state, {}).items():
            continuous[name] = continuous.get(name, 0.0) + rate * dwell
        if state in design.sampled_unbound:
            walk.unbound_time += dwell
        if state in design.sampled_bound:
            walk.bound_duration += dwell

        if chosen.stimulus is Stimulus.BIND:
            ligand = LigandRole.SIGNAL if rng.random() < alpha_s else LigandRole.INTERFERER
        elif chosen.stimulus is Stimulus.UNBIND:
            ligand = None
        for name, count in chosen.emissions:
            walk.emissions[name] += count
        state = chosen.target
        walk.path.append(state)
    else:
        raise NumericError(f"{design.kind.value}: walk did not return to rest")

    for name, amount in continuous.items():
        walk.emissions[name] += float(rng.poisson(amount))
    return walk


# =============================================================================
# TRANSDUCTION
# =============================================================================

def transduce_observation(
    design: ReceptorDesign,
    observation: ReceptorObservation,
    amplification: float = 1.0,
    rng: Optional[np.random.Generator] = None,
    mode: TransductionMode = TransductionMode.KPR,
) -> Dict[str, int]:
    """
    Comptes de molécules intracellulaires libérées pour une observation.

    ``amplification`` multiplie M et S. Avec ``TransductionMode.KPR``, chaque
    durée liée tau finit dans le sous-état 1 avec probabilité exp(-beta·tau),
    ce qui exige des durées explicites et un générateur.
    """
    if amplification < 1:
        raise DomainError(f"amplification must be >= 1, got {amplification}")
    n = observation.n_samples
    kind = design.kind
    if kind is StatisticKind.BOUND_COUNT:
        return {"M": int(round(observation.n_bound * amplification))}

    counts: Dict[str, int] = {}
    if kind in (StatisticKind.TOTAL_CONC, StatisticKind.SIGNAL_CONC):
        s_rate = design.state_emissions.get("U_A", {}).get("S", DEFAULT_S_RATE)
        counts["S"] = int(round(s_rate * amplification * observation.total_unbound_time))
    if kind in (StatisticKind.TOTAL_CONC, StatisticKind.RATIO):
        counts["R"] = n
    if kind in (StatisticKind.RATIO, StatisticKind.SIGNAL_CONC):
        if mode is TransductionMode.IDEAL:
            d1, d2 = observation.bin_counts
        else:
            if observation.bound_durations is None or rng is None:
                raise DomainError("proofreading transduction needs bound durations and a generator")
            beta = design.kpr_rate or 0.0
            stays = rng.random(len(observation.bound_durations)) < np.exp(-beta * observation.bound_durations)
            d1 = int(np.count_nonzero(stays))
            d2 = len(observation.bound_durations) - d1
        counts["D1"] = int(d1)
        counts["D2"] = int(d2)
    return counts


# =============================================================================
# COMPUTATION NETWORKS
# =============================================================================

@dataclass(frozen=True)
class DetectorParameters:
    """
    Constantes branchées dans un réseau de calcul.

    Attributes:
        k_on: Taux de liaison
        w21, w22: Seconde ligne de l'inverse de la matrice de binning
        threshold: Seuil de décision, en unités de la statistique
        threshold_amplification: Facteur appliqué à la production de Y et au compte seuil
        s_amplification: Facteur appliqué à la libération de S (consommation en k_on/A)
        comparator_rate: Taux d'annihilation du comparateur
    """
    k_on: float
    w21: float = 0.0
    w22: float = 0.0
    threshold: float = 0.0
    threshold_amplification: float = 1.0
    s_amplification: float = 1.0
    comparator_rate: float = 1.0

    @classmethod
    def for_detector(
        cls,
        scenario: ChannelScenario,
        scheme: Optional[BinningScheme],
        threshold: float,
        threshold_amplification: Optional[float] = None,
        s_amplification: float = 1.0,
        comparator_rate: float = 1.0,
    ) -> 'DetectorParameters':
        if threshold_amplification is None:
            threshold_amplification = choose_threshold_amplification(threshold)
        return cls(
            k_on=scenario.k_on,
            w21=scheme.w21 if scheme is not None else 0.0,
            w22=scheme.w22 if scheme is not None else 0.0,
            threshold=threshold,
            threshold_amplification=threshold_amplification,
            s_amplification=s_amplification,
            comparator_rate=comparator_rate,
        )

    @property
    def threshold_count(self) -> int:
        """Nombre de molécules X, floor(threshold · amplification)."""
        return max(0, int(math.floor(self.threshold * self.threshold_amplification)))


def choose_threshold_amplification(threshold: float, minimum_count: int = MIN_THRESHOLD_COUNT) -> float:
    """Plus petite puissance de dix qui porte le compte seuil à au moins ``minimum_count``."""
    if threshold <= 0 or threshold >= minimum_count:
        return 1.0
    return 10.0 ** math.ceil(math.log10(minimum_count / threshold))


def _add_weighted_production(network: ReactionNetwork, source: str, weight: float) -> None:
    if weight > 0:
        network.add_reaction([source], [source, "Y"], weight, label=f"{source} produces Y")
    elif weight < 0:
        network.add_reaction([source], [source, "Yn"], -weight, label=f"{source} produces Yn")


def build_network(design: ReceptorDesign, counts: Mapping[str, float], params: DetectorParameters) -> ReactionNetwork:
    """
    Réseau de calcul dont l'état stationnaire ``Y - Yn`` vaut la statistique amplifiée.

    Raises:
        NetworkError: Si le design est inconnu ou qu'un compte manque
    """
    kind = design.kind
    network = ReactionNetwork(f"{kind.value.lower()}-computation")
    try:
        if kind is StatisticKind.BOUND_COUNT:
            network.add_species("M", counts["M"])
            return network

        for name in design.emitted_species():
            network.add_species(name, counts[name])
    except KeyError as exc:
        raise NetworkError(f"{kind.value}: missing count for {exc.args[0]}") from None
    network.add_species("Y", 0.0)
    network.add_species("Yn", 0.0)
    amp = params.threshold_amplification
    consume_rate = params.k_on / params.s_amplification

    if kind is StatisticKind.TOTAL_CONC:
        network.add_reaction(["R"], ["R", "Y"], amp, label="R produces Y")
        network.add_reaction(["S", "Y"], ["S"], consume_rate, label="S consumes Y")
    elif kind in (StatisticKind.RATIO, StatisticKind.SIGNAL_CONC):
        _add_weighted_production(network, "D1", amp * params.w21)
        _add_weighted_production(network, "D2", amp * params.w22)
        consumer, rate = ("R", 1.0) if kind is StatisticKind.RATIO else ("S", consume_rate)
        network.add_reaction([consumer, "Y"], [consumer], rate, label=f"{consumer} consumes Y")
        network.add_reaction([consumer, "Yn"], [consumer], rate, label=f"{consumer} consumes Yn")
    else:
        raise NetworkError(f"unknown receptor design: {kind!r}")
    return network


def analytic_steady_state(design: ReceptorDesign, counts: Mapping[str, float], params: DetectorParameters) -> float:
    """État stationnaire de ``Y - Yn`` en forme fermée pour le réseau de calcul."""
    kind = design.kind
    amp = params.threshold_amplification
    if kind is StatisticKind.BOUND_COUNT:
        return float(counts["M"])
    consumption = (params.k_on / params.s_amplification) * counts.get("S", 0.0)
    if kind is StatisticKind.TOTAL_CONC:
        return amp * counts["R"] / consumption
    weighted = amp * (params.w21 * counts["D1"] + params.w22 * counts["D2"])
    if kind is StatisticKind.RATIO:
        return weighted / counts["R"]
    return weighted / consumption


def network_decision(design: ReceptorDesign, counts: Mapping[str, float], params: DetectorParameters) -> int:
    """Sortie du comparateur avec Y et Yn à leurs comptes stationnaires."""
    if design.kind is StatisticKind.BOUND_COUNT:
        return comparator_decide(counts["M"], params.threshold_count)
    net = analytic_steady_state(design, counts, params)
    y, y_neg = (net, 0.0) if net >= 0 else (0.0, -net)
    return comparator_decide(round(y), params.threshold_count, round(y_neg))


# =============================================================================
# ACTIVATION
# =============================================================================

@dataclass(frozen=True)
class ActivationParameters:
    """
    Constantes des signaux d'activation et de désactivation.

    Attributes:
        psi_plus: A+ libéré par une impulsion d'activation
        psi_minus: A- libéré par une impulsion de désactivation (dépasse psi_plus pour vider A+)
        rho: Taux d'annihilation A+ + A-
        omega: Taux des transitions du récepteur pilotées par A+
        pulse_width: Largeur des impulsions rectangulaires (s)
    """
    psi_plus: float
    psi_minus: float
    rho: float
    omega: float
    pulse_width: float

    @classmethod
    def for_scenario(cls, scenario: ChannelScenario, bit: int = 1) -> 'ActivationParameters':
        """Taux 10³ fois la réaction de liaison la plus rapide, impulsions de 10⁻³ fois le temps de corrélation."""
        c_tot = scenario.signal_concentration(bit) + scenario.mean_c_in
        fastest = max(scenario.k_on * c_tot, scenario.spec_s.k_off, scenario.spec_in.k_off)
        tau_b = correlation_time(c_tot, scenario.k_on, scenario.spec_s.k_off)
        fast = FAST_RATE_FACTOR * fastest
        return cls(psi_plus=1.0, psi_minus=2.0, rho=fast, omega=fast, pulse_width=PULSE_WIDTH_FACTOR * tau_b)


def build_activation_network(t_activation: float, t_deactivation: float, params: ActivationParameters) -> ReactionNetwork:
    """0 -> A+ pendant g(t), 0 -> A- pendant d(t), A+ + A- -> 0."""
    if t_deactivation <= t_activation + params.pulse_width:
        raise DomainError("deactivation must start after the activation pulse ends")
    network = ReactionNetwork("activation")
    network.add_species("A+", 0.0)
    network.add_species("A-", 0.0)
    network.add_reaction([], ["A+"], params.psi_plus, trigger=Pulse(t_activation, params.pulse_width), label="g(t)")
    network.add_reaction([], ["A-"], params.psi_minus, trigger=Pulse(t_deactivation, params.pulse_width), label="d(t)")
    network.add_reaction(["A+", "A-"], [], params.rho, label="annihilation")
    return network
