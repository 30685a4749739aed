# -*- coding: utf-8 -*-
"""
Statistiques de décision et leurs moments analytiques.

Quatre statistiques sont calculées à partir de l'observation d'un symbole :

- BOUND_COUNT : nombre de récepteurs liés n_B
- TOTAL_CONC : estimation sans biais de la concentration totale (N-1)/(k_on·T_u)
- RATIO : estimation par la méthode des moments de la fraction signal alpha_s
  à partir des durées liées classées en bins
- SIGNAL_CONC : produit des deux estimations précédentes

Les moments sont moyennés sur le nombre poissonnien d'interférents par une
somme tronquée (``poisson_window``). Pour TOTAL_CONC et SIGNAL_CONC, une
approximation fermée par intégrale gaussienne est utilisée par défaut ; la
somme tronquée exacte s'obtient avec ``VarianceMethod.EXACT``.

Coefficient Gamma_2 : l'expression couramment imprimée contient la paire
``+ w22² q21 q22 - w22² q21 q22``, qui s'annule et prive le crochet du terme
``- 2 w22² q21 q22``. ``gamma_coefficients`` utilise la forme qui concorde
avec le développement de covariance de ``ratio_variance_oracle`` ;
``printed_gamma2`` garde l'expression littérale pour comparaison.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple, Optional, Tuple, Union

import numpy as np
from scipy import stats

from src.core.binding.kinetics import DEFAULT_NU, LigandSpec, bound_probability, default_time_threshold
from src.core.binding.sampler import ChannelScenario
from src.core.errors import DomainError, NumericError, SaturationError, SingularityError

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]

POISSON_SPAN = 12.0
POISSON_RELATIVE_TAIL = 1e-14
MAX_WINDOW_EXTENSIONS = 200
SINGULARITY_TOLERANCE = 1e-12


class VarianceMethod(Enum):
    """Mode de calcul des variances moyennées sur Poisson."""
    CLOSED = "closed"
    EXACT = "exact"


# =============================================================================
# TYPES
# =============================================================================

@dataclass(frozen=True)
class GaussianMoments:
    """Moyenne et variance d'une statistique sous une hypothèse."""
    mean: float
    variance: float

    def __post_init__(self):
        if not (math.isfinite(self.mean) and math.isfinite(self.variance)):
            raise NumericError(f"non-finite moments: mean={self.mean}, variance={self.variance}")
        if self.variance <= 0:
            raise NumericError(f"variance must be > 0, got {self.variance}")

    @property
    def std(self) -> float:
        return math.sqrt(self.variance)

    def to_dict(self) -> dict:
        return {'mean': self.mean, 'variance': self.variance}


@dataclass(frozen=True, eq=False)
class BinningScheme:
    """
    Partition en deux bins des durées liées, coupée à ``t1``.

    ``q[i, j]`` est la probabilité qu'une liaison du ligand j (0 : interférent,
    1 : signal) tombe dans le bin i. ``w`` est son inverse.
    """
    nu: float
    t1: float
    q: np.ndarray
    w: np.ndarray

    @property
    def w21(self) -> float:
        return float(self.w[1, 0])

    @property
    def w22(self) -> float:
        return float(self.w[1, 1])

    def to_dict(self) -> dict:
        return {'nu': self.nu, 't1': self.t1, 'q': self.q.tolist(), 'w': self.w.tolist()}


class GammaCoefficients(NamedTuple):
    gamma1: float
    gamma2: float
    gamma3: float


# =============================================================================
# BINNING
# =============================================================================

def build_binning(nu: float, spec_s: LigandSpec, spec_in: LigandSpec) -> BinningScheme:
    """
    Construit le binning de seuil t1 = nu / k_off(interférent).

    Raises:
        DomainError: Si nu <= 0
        SingularityError: Si |det q| < 1e-12 (taux de dissociation égaux)
    """
    t1 = default_time_threshold(spec_in, nu)
    stay_in = math.exp(-spec_in.k_off * t1)
    stay_s = math.exp(-spec_s.k_off * t1)
    q = np.array([
        [-math.expm1(-spec_in.k_off * t1), -math.expm1(-spec_s.k_off * t1)],
        [stay_in, stay_s],
    ])
    det = q[0, 0] * q[1, 1] - q[0, 1] * q[1, 0]
    if abs(det) < SINGULARITY_TOLERANCE:
        raise SingularityError(f"binning matrix is singular (det={det:.3e}): ligands indistinguishable")
    w = np.array([[q[1, 1], -q[0, 1]], [-q[1, 0], q[0, 0]]]) / det
    return BinningScheme(nu=nu, t1=t1, q=q, w=w)


def bin_probabilities(alpha_s: ArrayLike, scheme: BinningScheme) -> np.ndarray:
    """p = q · [alpha_in, alpha_s] ; le dernier axe indexe les bins."""
    alpha_s = np.asarray(alpha_s, dtype=float)
    alpha = np.stack([1.0 - alpha_s, alpha_s], axis=-1)
    return alpha @ scheme.q.T


# =============================================================================
# ESTIMATORS
# =============================================================================

def estimate_total_concentration(n_samples: int, total_unbound_time: ArrayLike, k_on: float) -> ArrayLike:
    """
    Estimation sans biais de la concentration totale (N - 1) / (k_on · T_u).

    Raises:
        DomainError: Si n_samples < 2
        SaturationError: Si un temps libre total est nul
    """
    if n_samples < 2:
        raise DomainError(f"n_samples must be >= 2, got {n_samples}")
    t_u = np.asarray(total_unbound_time, dtype=float)
    if np.any(t_u <= 0):
        raise SaturationError("total unbound time is zero: receiver never unbound")
    value = (n_samples - 1) / (k_on * t_u)
    return float(value) if np.ndim(value) == 0 else value


def estimate_total_concentration_ml(n_samples: int, total_unbound_time: ArrayLike, k_on: float) -> ArrayLike:
    """Estimation du maximum de vraisemblance (biaisée) N / (k_on · T_u)."""
    unbiased = estimate_total_concentration(n_samples, total_unbound_time, k_on)
    return unbiased * n_samples / (n_samples - 1)


def estimate_concentration_ratio(bin_counts, n_samples: int, scheme: BinningScheme) -> ArrayLike:
    """
    Estimation de alpha_s par la méthode des moments : (n_b1·w21 + n_b2·w22) / N.

    La valeur n'est pas bornée à [0, 1]. ``bin_counts`` est une paire ou un
    tableau de forme (..., 2).
    """
    counts = np.asarray(bin_counts, dtype=float)
    if counts.shape[-1] != 2:
        raise DomainError("bin_counts must hold two bins")
    if np.any(counts < 0) or np.any(counts.sum(axis=-1) > n_samples):
        raise DomainError("bin counts must be >= 0 and sum to at most n_samples")
    if n_samples <= 0:
        raise DomainError("n_samples must be > 0")
    value = (counts[..., 0] * scheme.w21 + counts[..., 1] * scheme.w22) / n_samples
    return float(value) if np.ndim(value) == 0 else value


def estimate_signal_concentration(
    total_unbound_time: ArrayLike,
    bin_counts,
    n_samples: int,
    scheme: BinningScheme,
    k_on: float,
) -> ArrayLike:
    """Estimation de la concentration signal : concentration totale estimée fois ratio estimé."""
    return estimate_total_concentration(n_samples, total_unbound_time, k_on) \
        * estimate_concentration_ratio(bin_counts, n_samples, scheme)


# =============================================================================
# RATIO ESTIMATOR VARIANCE
# =============================================================================

def gamma_coefficients(c_s: float, scheme: BinningScheme) -> GammaCoefficients:
    """
    Coefficients de la variance conditionnelle de l'estimateur du ratio.

    Var[alpha_hat | n_in] = (Γ1 c_in² + Γ2 c_in + Γ3) / (N (c_s + c_in)²)
    """
    if c_s < 0:
        raise DomainError(f"c_s must be >= 0, got {c_s}")
    (q11, q12), (q21, q22) = scheme.q
    w21, w22 = scheme.w21, scheme.w22
    gamma1 = w21 ** 2 * (q11 - q11 ** 2) + w22 ** 2 * (q21 - q21 ** 2) - 2 * w21 * w22 * q11 * q21
    gamma2 = c_s * (
        w21 ** 2 * (q11 + q12 - 2 * q11 * q12)
        + w22 ** 2 * (q21 + q22 - 2 * q21 * q22)
        - 2 * w21 * w22 * (q11 * q22 + q12 * q21)
    )
    gamma3 = c_s ** 2 * (w21 ** 2 * (q12 - q12 ** 2) + w22 ** 2 * (q22 - q22 ** 2) - 2 * w21 * w22 * q12 * q22)
    if c_s > 0 and logger.isEnabledFor(logging.DEBUG):
        printed = printed_gamma2(c_s, scheme)
        logger.debug("gamma2=%.12g, printed form=%.12g (difference %.3e)", gamma2, printed, printed - gamma2)
    return GammaCoefficients(gamma1, gamma2, gamma3)


def printed_gamma2(c_s: float, scheme: BinningScheme) -> float:
    """Transcription littérale de l'expression imprimée de Gamma_2, gardée pour comparaison."""
    (q11, q12), (q21, q22) = scheme.q
    w21, w22 = scheme.w21, scheme.w22
    return c_s * (
        w21 ** 2 * q12 + w21 ** 2 * q11 - w21 ** 2 * q11 * q12 - w21 ** 2 * q11 * q12
        - 2 * w21 * w22 * q11 * q22 - 2 * w21 * w22 * q12 * q21
        + w22 ** 2 * q22 + w22 ** 2 * q21 + w22 ** 2 * q21 * q22 - w22 ** 2 * q21 * q22
    )


def ratio_variance(c_s: float, n_in: ArrayLike, volume: float, scheme: BinningScheme, n_samples: int) -> ArrayLike:
    """Variance conditionnelle de l'estimation du ratio, forme fermée en Gamma."""
    c_in = np.asarray(n_in, dtype=float) / volume
    c_tot = c_s + c_in
    if np.any(c_tot <= 0):
        raise DomainError("total concentration must be > 0")
    g1, g2, g3 = gamma_coefficients(c_s, scheme)
    value = (g1 * c_in ** 2 + g2 * c_in + g3) / (n_samples * c_tot ** 2)
    return float(value) if np.ndim(value) == 0 else value


def ratio_variance_oracle(c_s: float, n_in: int, volume: float, scheme: BinningScheme, n_samples: int) -> float:
    """
    Variance conditionnelle de l'estimation du ratio par la covariance multinomiale.

    Var = (1/N²) Σ_ij w2i w2j Cov[n_bi, n_bj] avec Cov_ii = N p_i (1 - p_i)
    et Cov_ij = -N p_i p_j.
    """
    c_in = n_in / volume
    c_tot = c_s + c_in
    if c_tot <= 0:
        raise DomainError("total concentration must be > 0")
    p = bin_probabilities(c_s / c_tot, scheme)
    w2 = scheme.w[1]
    total = 0.0
    for i in range(2):
        for j in range(2):
            cov = n_samples * p[i] * (1.0 - p[i]) if i == j else -n_samples * p[i] * p[j]
            total += w2[i] * w2[j] * cov
    return total / n_samples ** 2


# =============================================================================
# POISSON AVERAGING
# =============================================================================

def poisson_window(mean: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    Support et poids normalisés pour moyenner sur un nombre poissonnien.

    Part de [mean - 12√mean, mean + 12√mean] et s'élargit jusqu'à ce que chaque
    bord porte moins de 1e-14 de la masse de la fenêtre.

    Raises:
        NumericError: Si la fenêtre ne converge pas
    """
    if mean < 0 or not math.isfinite(mean):
        raise DomainError(f"Poisson mean must be finite and >= 0, got {mean}")
    if mean == 0:
        return np.zeros(1, dtype=np.int64), np.ones(1)
    spread = math.sqrt(mean)
    lo = max(0, int(math.floor(mean - POISSON_SPAN * spread)))
    hi = int(math.ceil(mean + POISSON_SPAN * spread))
    step = int(math.ceil(spread)) + 1
    for _ in range(MAX_WINDOW_EXTENSIONS):
        n = np.arange(lo, hi + 1, dtype=np.int64)
        pmf = stats.poisson.pmf(n, mean)
        mass = pmf.sum()
        low_ok = lo == 0 or pmf[0] < POISSON_RELATIVE_TAIL * mass
        high_ok = pmf[-1] < POISSON_RELATIVE_TAIL * mass
        if low_ok and high_ok:
            return n, pmf / mass
        logger.debug("widening Poisson window around %s: [%d, %d]", mean, lo, hi)
        if not low_ok:
            lo = max(0, lo - step)
        if not high_ok:
            hi += step
    raise NumericError(f"Poisson window around {mean} did not converge")


def _signal(scenario: ChannelScenario, bit: int) -> float:
    return scenario.signal_concentration(bit)


def _scheme_for(scenario: ChannelScenario, scheme: Optional[BinningScheme], nu: float) -> BinningScheme:
    return scheme if scheme is not None else build_binning(nu, scenario.spec_s, scenario.spec_in)


# =============================================================================
# CONDITIONAL MOMENTS (fixed interferer count)
# =============================================================================

def conditional_nbr(c_s: float, n_in: ArrayLike, scenario: ChannelScenario) -> Tuple[ArrayLike, ArrayLike]:
    """Moyenne et variance binomiales de n_B à nombre d'interférents fixé."""
    p_b = np.asarray(bound_probability(c_s, np.asarray(n_in) / scenario.volume, scenario.spec_s, scenario.spec_in))
    n = scenario.n_receptors
    return n * p_b, n * p_b * (1.0 - p_b)


def conditional_ctot(c_s: float, n_in: ArrayLike, scenario: ChannelScenario) -> Tuple[ArrayLike, ArrayLike]:
    """Moyenne c_tot et variance c_tot²/(N-2) de l'estimation de la concentration totale."""
    c_tot = c_s + np.asarray(n_in, dtype=float) / scenario.volume
    return c_tot, c_tot ** 2 / (scenario.n_receptors - 2)


def conditional_cs(c_s: float, n_in: ArrayLike, scenario: ChannelScenario, scheme: BinningScheme):
    """Moyenne c_s et variance (Γ1 c_in² + Γ2 c_in + Γ3 + c_s²)/N de l'estimation de la concentration signal."""
    c_in = np.asarray(n_in, dtype=float) / scenario.volume
    g1, g2, g3 = gamma_coefficients(c_s, scheme)
    variance = (g1 * c_in ** 2 + g2 * c_in + g3 + c_s ** 2) / scenario.n_receptors
    return np.full_like(c_in, c_s), variance


# =============================================================================
# UNCONDITIONAL MOMENTS
# =============================================================================

def moments_nbr(scenario: ChannelScenario, bit: int) -> GaussianMoments:
    """Moments du nombre de récepteurs liés, moyennés sur le nombre d'interférents."""
    c_s = _signal(scenario, bit)
    n, weights = poisson_window(scenario.mean_n_in)
    means, variances = conditional_nbr(c_s, n, scenario)
    mean = float(np.dot(means, weights))
    variance = float(np.dot(variances, weights) + np.dot((means - mean) ** 2, weights))
    return GaussianMoments(mean, variance)


def moments_ctot(
    scenario: ChannelScenario,
    bit: int,
    method: VarianceMethod = VarianceMethod.CLOSED,
) -> GaussianMoments:
    """Moments de l'estimation de la concentration totale."""
    n_rec = scenario.n_receptors
    if n_rec <= 2:
        raise DomainError("n_receptors must be > 2")
    c_s = _signal(scenario, bit)
    mu = scenario.mean_n_in
    volume = scenario.volume

    if method is VarianceMethod.CLOSED:
        mean = c_s + mu / volume
        variance = mean ** 2 / (n_rec - 2) + mu * (n_rec - 1) / (volume ** 2 * (n_rec - 2))
        return GaussianMoments(mean, variance)

    n, weights = poisson_window(mu)
    means, variances = conditional_ctot(c_s, n, scenario)
    mean = float(np.dot(means, weights))
    variance = float(np.dot(variances, weights) + np.dot((means - mean) ** 2, weights))
    return GaussianMoments(mean, variance)


def moments_alpha(
    scenario: ChannelScenario,
    bit: int,
    scheme: Optional[BinningScheme] = None,
    nu: float = DEFAULT_NU,
) -> GaussianMoments:
    """Moments de l'estimation du ratio, moyennés sur le nombre d'interférents."""
    scheme = _scheme_for(scenario, scheme, nu)
    c_s = _signal(scenario, bit)
    n, weights = poisson_window(scenario.mean_n_in)
    alpha = c_s / (c_s + n / scenario.volume)
    mean = float(np.dot(alpha, weights))
    spread = ratio_variance(c_s, n, scenario.volume, scheme, scenario.n_receptors)
    variance = float(np.dot(spread, weights) + np.dot((alpha - mean) ** 2, weights))
    return GaussianMoments(mean, variance)


def moments_cs(
    scenario: ChannelScenario,
    bit: int,
    scheme: Optional[BinningScheme] = None,
    nu: float = DEFAULT_NU,
    method: VarianceMethod = VarianceMethod.CLOSED,
) -> GaussianMoments:
    """Moments de l'estimation de la concentration signal."""
    scheme = _scheme_for(scenario, scheme, nu)
    c_s = _signal(scenario, bit)
    mu = scenario.mean_n_in
    volume = scenario.volume

    if method is VarianceMethod.CLOSED:
        g1, g2, g3 = gamma_coefficients(c_s, scheme)
        c_in = mu / volume
        variance = (g1 * c_in ** 2 + (g1 + g2) * c_in + g3 + c_s ** 2) / scenario.n_receptors
        return GaussianMoments(c_s, variance)

    n, weights = poisson_window(mu)
    _, variances = conditional_cs(c_s, n, scenario, scheme)
    return GaussianMoments(c_s, float(np.dot(variances, weights)))
