# -*- coding: utf-8 -*-
"""
Vérification de bout en bout des détecteurs en réseaux de réactions.

Chaque symbole est tiré une fois, dans son propre sous-flux, avec les durées
explicites de chaque récepteur. Chaque détecteur décide alors deux fois :
directement, en seuillant sa statistique, puis via son design de récepteur,
son réseau de calcul et son comparateur. Le rapport donne le taux d'accord,
l'erreur stationnaire des réseaux intégrés et la précision de la relecture cinétique.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, Optional

from src.core.binding.kinetics import DEFAULT_NU
from src.core.binding.sampler import ChannelScenario, ReceptorObservation, make_rng, sample_symbol
from src.core.crn.receptors import (
    DEFAULT_KAPPA,
    DEFAULT_S_RATE,
    DetectorParameters,
    ReceptorDesign,
    TransductionMode,
    analytic_steady_state,
    build_network,
    kpr_rate,
    network_decision,
    receptor_design,
    transduce_observation,
)
from src.core.crn.solvers import DEFAULT_ATOL, DEFAULT_RTOL, integrate_ode
from src.core.detection.detectors import (
    ALL_KINDS,
    DecisionModel,
    StatisticKind,
    bin_threshold,
    binning_for,
    build_decision_model,
    decide,
)
from src.core.detection.estimators import (
    BinningScheme,
    VarianceMethod,
    estimate_concentration_ratio,
    estimate_signal_concentration,
    estimate_total_concentration,
)
from src.core.errors import DomainError

logger = logging.getLogger(__name__)

MIN_SYMBOLS = 100
SYMBOL_STREAM = 11
KPR_STREAM = 12


@dataclass
class DetectorAgreement:
    """Comparaison directe contre réseau pour un détecteur."""
    kind: StatisticKind
    threshold: float
    threshold_count: int
    threshold_amplification: float
    symbols: int = 0
    agreements: int = 0
    direct_errors: int = 0
    network_errors: int = 0
    ode_checked: int = 0
    max_steady_state_error: float = 0.0

    @property
    def agreement_rate(self) -> float:
        return self.agreements / self.symbols if self.symbols else math.nan

    def to_dict(self) -> dict:
        return {
            'detector': self.kind.value,
            'symbols': self.symbols,
            'agreement_rate': self.agreement_rate,
            'direct_errors': self.direct_errors,
            'network_errors': self.network_errors,
            'threshold': self.threshold,
            'threshold_count': self.threshold_count,
            'threshold_amplification': self.threshold_amplification,
            'ode_checked': self.ode_checked,
            'max_steady_state_error': self.max_steady_state_error,
        }


@dataclass
class CrnValidationReport:
    symbols: int
    seed: int
    transduction: TransductionMode
    kappa: float
    detectors: Dict[StatisticKind, DetectorAgreement] = field(default_factory=dict)
    mean_first_bin: float = 0.0
    mean_kpr_d1: float = 0.0
    files: Dict[str, str] = field(default_factory=dict)

    @property
    def kpr_relative_error(self) -> float:
        """|E[D1] - E[n_b1]| / E[n_b1] en transduction avec relecture."""
        if self.mean_first_bin == 0:
            return math.nan
        return abs(self.mean_kpr_d1 - self.mean_first_bin) / self.mean_first_bin

    def to_dict(self) -> dict:
        return {
            'symbols': self.symbols,
            'seed': self.seed,
            'transduction': self.transduction.value,
            'kappa': self.kappa,
            'mean_first_bin': self.mean_first_bin,
            'mean_kpr_d1': self.mean_kpr_d1,
            'kpr_relative_error': self.kpr_relative_error,
            'detectors': [d.to_dict() for d in self.detectors.values()],
        }


def draw_symbol(scenario: ChannelScenario, bit: int, seed: int, index: int, t1: float) -> ReceptorObservation:
    """Observation du symbole ``index`` ; ne dépend que de (seed, index, bit), pas de la longueur du run."""
    return sample_symbol(scenario, bit, make_rng(seed, SYMBOL_STREAM, index), t1=t1, keep_durations=True)


def direct_statistic(
    observation: ReceptorObservation,
    kind: StatisticKind,
    scenario: ChannelScenario,
    scheme: Optional[BinningScheme],
) -> float:
    """Statistique d'une observation, telle que l'utilise le détecteur direct."""
    n = observation.n_samples
    if kind is StatisticKind.BOUND_COUNT:
        return float(observation.n_bound)
    if kind is StatisticKind.TOTAL_CONC:
        return estimate_total_concentration(n, observation.total_unbound_time, scenario.k_on)
    if kind is StatisticKind.RATIO:
        return estimate_concentration_ratio(observation.bin_counts, n, scheme)
    return estimate_signal_concentration(observation.total_unbound_time, observation.bin_counts, n, scheme,
                                         scenario.k_on)


def network_threshold(kind: StatisticKind, threshold: float, n_samples: int) -> float:
    """
    Seuil à l'échelle de sortie du réseau.

    Les réseaux libèrent un R par échantillon : les sorties de concentration
    portent N au lieu de N - 1 au numérateur.
    """
    if kind in (StatisticKind.TOTAL_CONC, StatisticKind.SIGNAL_CONC):
        return threshold * n_samples / (n_samples - 1)
    return threshold


def _relative_error(value: float, reference: float) -> float:
    scale = abs(reference)
    return abs(value - reference) / scale if scale > 0 else abs(value)


def run_crn_validation(
    scenario: ChannelScenario,
    symbols: int,
    seed: int = 0,
    kinds: Iterable[StatisticKind] = ALL_KINDS,
    nu: float = DEFAULT_NU,
    method: VarianceMethod = VarianceMethod.CLOSED,
    kappa: float = DEFAULT_KAPPA,
    transduction: TransductionMode = TransductionMode.IDEAL,
    s_rate: float = DEFAULT_S_RATE,
    s_amplification: float = 1000.0,
    threshold_amplification: Optional[float] = None,
    comparator_rate: float = 1.0,
    ode_check_symbols: int = 50,
    t_end: float = 1.0,
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
    progress_callback: Optional[Callable[[int, int, str], None]] = None,
) -> CrnValidationReport:
    """
    Compare les décisions des réseaux aux décisions directes par seuil.

    Args:
        scenario: Cadre de transmission
        symbols: Nombre de symboles aléatoires (>= 100)
        seed: Graine racine
        transduction: Répartition des durées utilisée pour les décisions
        s_amplification: Amplification de la libération de S
        threshold_amplification: Échelle Y/seuil (automatique si None ; DNBR utilise toujours 1)
        ode_check_symbols: Premiers symboles dont les réseaux sont intégrés numériquement
        progress_callback: Callback de progression (current, total, message)

    Returns:
        CrnValidationReport

    Raises:
        DomainError: Si symbols < 100
    """
    if symbols < MIN_SYMBOLS:
        raise DomainError(f"symbols must be >= {MIN_SYMBOLS}, got {symbols}")
    kinds = list(kinds)
    scheme = binning_for(scenario, kinds, nu)
    t1 = bin_threshold(scenario, scheme, nu)
    beta = kpr_rate(t1, kappa)
    n = scenario.n_receptors

    designs: Dict[StatisticKind, ReceptorDesign] = {}
    models: Dict[StatisticKind, DecisionModel] = {}
    params: Dict[StatisticKind, DetectorParameters] = {}
    report = CrnValidationReport(symbols=symbols, seed=seed, transduction=transduction, kappa=kappa)
    for kind in kinds:
        designs[kind] = receptor_design(kind, kpr=beta, s_rate=s_rate)
        models[kind] = build_decision_model(scenario, kind, scheme, nu, method)
        is_count = kind is StatisticKind.BOUND_COUNT
        params[kind] = DetectorParameters.for_detector(
            scenario, scheme,
            network_threshold(kind, models[kind].threshold, n),
            threshold_amplification=1.0 if is_count else threshold_amplification,
            s_amplification=1.0 if is_count else s_amplification,
            comparator_rate=comparator_rate,
        )
        report.detectors[kind] = DetectorAgreement(
            kind=kind,
            threshold=models[kind].threshold,
            threshold_count=params[kind].threshold_count,
            threshold_amplification=params[kind].threshold_amplification,
        )

    bits = make_rng(seed, SYMBOL_STREAM).integers(0, 2, size=symbols)
    first_bin_total = 0
    kpr_d1_total = 0
    step = max(1, symbols // 100)
    proofreading_design = designs.get(StatisticKind.RATIO) or receptor_design(StatisticKind.RATIO, kpr=beta)

    for index, bit in enumerate(bits):
        observation = draw_symbol(scenario, int(bit), seed, index, t1)
        kpr_rng = make_rng(seed, KPR_STREAM, index)
        kpr_counts = transduce_observation(proofreading_design, observation, rng=kpr_rng, mode=TransductionMode.KPR)
        first_bin_total += observation.bin_counts[0]
        kpr_d1_total += kpr_counts["D1"]

        for kind in kinds:
            design = designs[kind]
            agreement = report.detectors[kind]
            amplification = params[kind].s_amplification
            counts = transduce_observation(design, observation, amplification, rng=kpr_rng, mode=transduction)

            direct = decide(direct_statistic(observation, kind, scenario, scheme), models[kind])
            via_network = network_decision(design, counts, params[kind])
            agreement.symbols += 1
            agreement.agreements += int(direct == via_network)
            agreement.direct_errors += int(direct != bit)
            agreement.network_errors += int(via_network != bit)

            if index < ode_check_symbols and kind is not StatisticKind.BOUND_COUNT:
                network = build_network(design, counts, params[kind])
                solution = integrate_ode(network, t_end, rtol=rtol, atol=atol)
                final = solution.final
                error = _relative_error(final["Y"] - final["Yn"], analytic_steady_state(design, counts, params[kind]))
                agreement.ode_checked += 1
                agreement.max_steady_state_error = max(agreement.max_steady_state_error, error)

        if progress_callback and ((index + 1) % step == 0 or index + 1 == symbols):
            progress_callback(index + 1, symbols, "CRN validation")

    report.mean_first_bin = first_bin_total / symbols
    report.mean_kpr_d1 = kpr_d1_total / symbols
    for kind, agreement in report.detectors.items():
        logger.info(
            "%s: agreement %.4f over %d symbols, max steady-state error %.2e (%d integrated)",
            kind.value, agreement.agreement_rate, agreement.symbols,
            agreement.max_steady_state_error, agreement.ode_checked,
        )
    logger.info("Proofreading D1 relative error: %.3f", report.kpr_relative_error)
    return report
