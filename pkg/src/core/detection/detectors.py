# -*- coding: utf-8 -*-
"""
Détection à seuil et analyse du taux d'erreur binaire des quatre détecteurs.

Chaque statistique est modélisée comme gaussienne sous les deux hypothèses.
Le seuil de décision est le point où les deux densités sont égales (bits
équiprobables) ; la BEP analytique découle des queues gaussiennes.

Le Monte Carlo traite les essais par blocs de taille fixe. Le bloc ``b`` tire
toujours dans le sous-flux ``(seed, *key, b)`` : les comptes ne dépendent
pas du nombre de workers.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import special, stats

from src.core.binding.kinetics import DEFAULT_NU, default_time_threshold
from src.core.binding.sampler import ChannelScenario, ObservationBatch, make_rng, sample_symbols
from src.core.detection.estimators import (
    BinningScheme,
    GaussianMoments,
    VarianceMethod,
    build_binning,
    estimate_concentration_ratio,
    estimate_signal_concentration,
    estimate_total_concentration,
    moments_alpha,
    moments_ctot,
    moments_cs,
    moments_nbr,
)
from src.core.errors import DomainError, NumericError

logger = logging.getLogger(__name__)

DEFAULT_BLOCK_SIZE = 4096
MIN_TRIALS = 1000
DEGENERATE_GAMMA = 1e-12

ProgressCallback = Callable[[int, int, str], None]


class StatisticKind(Enum):
    """Statistique de décision, nommée d'après le détecteur qui l'utilise."""
    BOUND_COUNT = "DNBR"
    TOTAL_CONC = "DRUT"
    RATIO = "DRBT"
    SIGNAL_CONC = "DRUBT"

    @property
    def detector(self) -> str:
        return self.value

    @classmethod
    def from_name(cls, name: str) -> 'StatisticKind':
        """Accepte un nom de détecteur (``DRUT``) ou de membre (``TOTAL_CONC``)."""
        key = name.strip().upper().replace("-", "_")
        for kind in cls:
            if key in (kind.value, kind.name):
                return kind
        raise DomainError(f"unknown detector: {name!r}")


ALL_KINDS: Tuple[StatisticKind, ...] = tuple(StatisticKind)
BINNED_KINDS = frozenset({StatisticKind.RATIO, StatisticKind.SIGNAL_CONC})


# =============================================================================
# TYPES
# =============================================================================

@dataclass(frozen=True)
class DecisionModel:
    """Moments gaussiens d'une statistique sous les deux bits, et seuil de décision."""
    statistic_kind: StatisticKind
    moments_bit0: GaussianMoments
    moments_bit1: GaussianMoments
    threshold: float

    def __post_init__(self):
        if self.moments_bit1.mean < self.moments_bit0.mean:
            raise NumericError(
                f"{self.statistic_kind.value}: bit-1 mean {self.moments_bit1.mean} "
                f"is below bit-0 mean {self.moments_bit0.mean}"
            )
        if not math.isfinite(self.threshold):
            raise NumericError(f"{self.statistic_kind.value}: threshold is not finite")

    @classmethod
    def from_moments(cls, kind: StatisticKind, m0: GaussianMoments, m1: GaussianMoments) -> 'DecisionModel':
        return cls(kind, m0, m1, optimal_threshold(m0, m1))


@dataclass(frozen=True)
class BepResult:
    """BEP analytique et mesurée d'un détecteur."""
    analytic_bep: float
    mc_bep: float
    mc_trials: int
    mc_ci95: float
    mc_errors: int = 0

    @property
    def binomial_std(self) -> float:
        """Écart-type du taux mesuré si la valeur analytique était exacte."""
        if self.mc_trials == 0:
            return 0.0
        p = self.analytic_bep
        return math.sqrt(p * (1.0 - p) / self.mc_trials)

    def consistent(self, relative: float = 0.1, sigmas: float = 3.0) -> bool:
        """|mc - analytic| <= max(sigmas · binomial std, relative · analytic)."""
        tolerance = max(sigmas * self.binomial_std, relative * self.analytic_bep)
        return abs(self.mc_bep - self.analytic_bep) <= tolerance

    def to_dict(self) -> dict:
        return {
            'analytic_bep': self.analytic_bep,
            'mc_bep': self.mc_bep,
            'mc_trials': self.mc_trials,
            'mc_ci95': self.mc_ci95,
            'mc_errors': self.mc_errors,
        }


# =============================================================================
# THRESHOLD AND DECISION
# =============================================================================

def optimal_threshold(m0: GaussianMoments, m1: GaussianMoments) -> float:
    """
    Point entre les moyennes où les deux densités gaussiennes sont égales.

    Prend celle des deux expressions équivalentes de la racine qui évite
    l'annulation numérique. Revient au milieu quand les variances sont
    égales à 1e-12 près en relatif.

    Raises:
        NumericError: Si le discriminant est négatif
    """
    v0, v1 = m0.variance, m1.variance
    mu0, mu1 = m0.mean, m1.mean
    gamma = v1 - v0
    if abs(gamma) < DEGENERATE_GAMMA * max(v0, v1):
        if gamma != 0:
            logger.debug("variances equal to 1e-12, using midpoint threshold")
        return 0.5 * (mu0 + mu1)

    log_ratio = 0.5 * math.log(v1 / v0)
    discriminant = (mu1 - mu0) ** 2 + 2.0 * gamma * log_ratio
    if discriminant < 0:
        raise NumericError(f"negative discriminant in threshold: {discriminant}")
    b = v1 * mu0 - v0 * mu1
    s = math.sqrt(v0 * v1 * discriminant)
    if b >= 0:
        return (b + s) / gamma
    return (v1 * mu0 ** 2 - v0 * mu1 ** 2 - 2.0 * v0 * v1 * log_ratio) / (b - s)


def threshold_density_mismatch(model: DecisionModel, threshold: Optional[float] = None) -> float:
    """Écart relatif entre les deux densités gaussiennes au seuil."""
    lam = model.threshold if threshold is None else threshold
    log0 = stats.norm.logpdf(lam, model.moments_bit0.mean, model.moments_bit0.std)
    log1 = stats.norm.logpdf(lam, model.moments_bit1.mean, model.moments_bit1.std)
    return float(-math.expm1(-abs(log0 - log1)))


def decide(statistic_value, model: DecisionModel):
    """Bit 1 si la statistique dépasse le seuil, bit 0 sinon (égalité : 0)."""
    decision = np.asarray(statistic_value) > model.threshold
    if np.ndim(decision) == 0:
        return int(decision)
    return decision.astype(np.int64)


def analytic_bep(model: DecisionModel, threshold: Optional[float] = None) -> float:
    """BEP à bits équiprobables ; ``threshold`` remplace le seuil du modèle."""
    lam = model.threshold if threshold is None else threshold
    m0, m1 = model.moments_bit0, model.moments_bit1
    return 0.25 * float(
        special.erfc((lam - m0.mean) / math.sqrt(2.0 * m0.variance))
        + special.erfc((m1.mean - lam) / math.sqrt(2.0 * m1.variance))
    )


# =============================================================================
# MODELS
# =============================================================================

def binning_for(
    scenario: ChannelScenario,
    kinds: Iterable[StatisticKind],
    nu: float = DEFAULT_NU,
) -> Optional[BinningScheme]:
    """
    Binning si l'un des ``kinds`` lit les bins de durées liées, None sinon.

    DNBR et DRUT ne lisent jamais les bins : ils restent définis à taux de
    dissociation égaux, où la matrice de binning est singulière.

    Raises:
        SingularityError: Si un détecteur à bins est demandé et que les ligands sont indiscernables
    """
    if BINNED_KINDS.isdisjoint(kinds):
        return None
    return build_binning(nu, scenario.spec_s, scenario.spec_in)


def bin_threshold(scenario: ChannelScenario, scheme: Optional[BinningScheme], nu: float = DEFAULT_NU) -> float:
    """Frontière des bins au tirage : celle du binning, ou nu/k_off(interférent) sans binning."""
    return scheme.t1 if scheme is not None else default_time_threshold(scenario.spec_in, nu)


def statistic_moments(
    scenario: ChannelScenario,
    kind: StatisticKind,
    bit: int,
    scheme: Optional[BinningScheme] = None,
    nu: float = DEFAULT_NU,
    method: VarianceMethod = VarianceMethod.CLOSED,
) -> GaussianMoments:
    if kind is StatisticKind.BOUND_COUNT:
        return moments_nbr(scenario, bit)
    if kind is StatisticKind.TOTAL_CONC:
        return moments_ctot(scenario, bit, method=method)
    if kind is StatisticKind.RATIO:
        return moments_alpha(scenario, bit, scheme=scheme, nu=nu)
    return moments_cs(scenario, bit, scheme=scheme, nu=nu, method=method)


def build_decision_model(
    scenario: ChannelScenario,
    kind: StatisticKind,
    scheme: Optional[BinningScheme] = None,
    nu: float = DEFAULT_NU,
    method: VarianceMethod = VarianceMethod.CLOSED,
) -> DecisionModel:
    """Moments sous les deux bits et seuil optimal correspondant."""
    if scheme is None and kind in (StatisticKind.RATIO, StatisticKind.SIGNAL_CONC):
        scheme = build_binning(nu, scenario.spec_s, scenario.spec_in)
    m0 = statistic_moments(scenario, kind, 0, scheme, nu, method)
    m1 = statistic_moments(scenario, kind, 1, scheme, nu, method)
    return DecisionModel.from_moments(kind, m0, m1)


def statistic_values(
    batch: ObservationBatch,
    kind: StatisticKind,
    scenario: ChannelScenario,
    scheme: Optional[BinningScheme] = None,
) -> np.ndarray:
    """Évalue une statistique sur chaque symbole d'un lot."""
    n = batch.n_samples
    if kind is StatisticKind.BOUND_COUNT:
        return batch.n_bound.astype(float)
    if kind is StatisticKind.TOTAL_CONC:
        return np.asarray(estimate_total_concentration(n, batch.total_unbound_time, scenario.k_on))
    if scheme is None:
        raise DomainError(f"{kind.value} needs a binning scheme")
    if kind is StatisticKind.RATIO:
        return np.asarray(estimate_concentration_ratio(batch.bin_counts, n, scheme))
    return np.asarray(estimate_signal_concentration(
        batch.total_unbound_time, batch.bin_counts, n, scheme, scenario.k_on))


# =============================================================================
# MONTE CARLO
# =============================================================================

def _block_sizes(trials: int, block_size: int) -> List[int]:
    full, rest = divmod(trials, block_size)
    return [block_size] * full + ([rest] if rest else [])


def _count_block_errors(
    scenario: ChannelScenario,
    models: Dict[StatisticKind, DecisionModel],
    scheme: Optional[BinningScheme],
    t1: float,
    seed: int,
    key: Tuple[int, ...],
    size: int,
) -> Dict[StatisticKind, int]:
    rng = make_rng(seed, *key)
    bits = rng.integers(0, 2, size=size)
    batch = sample_symbols(scenario, bits, rng, t1=t1)
    errors = {}
    for kind, model in models.items():
        decisions = decide(statistic_values(batch, kind, scenario, scheme), model)
        errors[kind] = int(np.count_nonzero(decisions != bits))
    return errors


def monte_carlo_bep_all(
    scenario: ChannelScenario,
    kinds: Iterable[StatisticKind],
    trials: int,
    seed: int = 0,
    key: Sequence[int] = (),
    nu: float = DEFAULT_NU,
    method: VarianceMethod = VarianceMethod.CLOSED,
    workers: int = 1,
    block_size: int = DEFAULT_BLOCK_SIZE,
    models: Optional[Dict[StatisticKind, DecisionModel]] = None,
    progress_callback: Optional[ProgressCallback] = None,
) -> Dict[StatisticKind, BepResult]:
    """
    Mesure le taux d'erreur binaire de plusieurs détecteurs sur les mêmes symboles.

    Args:
        scenario: Cadre de transmission
        kinds: Détecteurs à évaluer
        trials: Nombre de bits émis (>= 1000)
        seed: Graine racine
        key: Clé de sous-flux supplémentaire (ex. indice du point de balayage)
        workers: Threads de traitement des blocs
        models: Modèles de décision précalculés (construits depuis le scénario sinon)
        progress_callback: Appelé avec (blocs_faits, blocs_total, message)

    Returns:
        Un BepResult par détecteur
    """
    kinds = list(kinds)
    if trials < MIN_TRIALS:
        raise DomainError(f"trials must be >= {MIN_TRIALS}, got {trials}")
    if block_size <= 0:
        raise DomainError("block_size must be > 0")
    scheme = binning_for(scenario, kinds, nu)
    t1 = bin_threshold(scenario, scheme, nu)
    if models is None:
        models = {kind: build_decision_model(scenario, kind, scheme, nu, method) for kind in kinds}
    else:
        models = {kind: models[kind] for kind in kinds}

    sizes = _block_sizes(trials, block_size)
    key = tuple(int(k) for k in key)
    totals = {kind: 0 for kind in kinds}

    def run(index: int) -> Dict[StatisticKind, int]:
        return _count_block_errors(scenario, models, scheme, t1, seed, key + (index,), sizes[index])

    if workers <= 1:
        block_results = []
        for index in range(len(sizes)):
            block_results.append(run(index))
            if progress_callback:
                progress_callback(index + 1, len(sizes), "Monte Carlo")
    else:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            futures = [executor.submit(run, index) for index in range(len(sizes))]
            block_results = []
            for index, future in enumerate(futures):
                block_results.append(future.result())
                if progress_callback:
                    progress_callback(index + 1, len(sizes), "Monte Carlo")

    for errors in block_results:
        for kind, count in errors.items():
            totals[kind] += count

    results = {}
    for kind in kinds:
        rate = totals[kind] / trials
        results[kind] = BepResult(
            analytic_bep=analytic_bep(models[kind]),
            mc_bep=rate,
            mc_trials=trials,
            mc_ci95=1.96 * math.sqrt(rate * (1.0 - rate) / trials),
            mc_errors=totals[kind],
        )
        logger.debug("%s: %d errors in %d trials", kind.value, totals[kind], trials)
    return results


def monte_carlo_bep(
    scenario: ChannelScenario,
    statistic_kind: StatisticKind,
    trials: int,
    seed: int = 0,
    **kwargs,
) -> BepResult:
    """BEP mesurée et analytique d'un détecteur."""
    return monte_carlo_bep_all(scenario, [statistic_kind], trials, seed, **kwargs)[statistic_kind]
