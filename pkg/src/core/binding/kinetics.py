# -*- coding: utf-8 -*-
"""
Statistiques de liaison exactes d'un récepteur exposé à deux types de ligands.

Un récepteur est un processus de Markov à temps continu à 3 états
(libre, lié au signal, lié à l'interférent). Tout ce module est fait de
fonctions pures de leurs entrées.

Unités : concentrations en molécules/μm³, taux de liaison en μm³/s,
taux de dissociation en 1/s, durées en s.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Union

import numpy as np

from src.core.errors import DomainError, NumericError

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]

DEFAULT_NU = 3.0


# =============================================================================
# TYPES
# =============================================================================

class LigandRole(Enum):
    """Rôle d'un type de molécule au récepteur."""
    SIGNAL = "signal"
    INTERFERER = "interferer"


@dataclass(frozen=True)
class LigandSpec:
    """
    Constantes cinétiques d'un type de molécule.

    Attributes:
        k_on: Taux de liaison (μm³/s)
        k_off: Taux de dissociation (1/s)
        label: Rôle de la molécule
    """
    k_on: float
    k_off: float
    label: LigandRole = LigandRole.SIGNAL

    def __post_init__(self):
        for name in ("k_on", "k_off"):
            value = getattr(self, name)
            if not math.isfinite(value) or value <= 0:
                raise DomainError(f"{name} must be finite and > 0, got {value!r}")

    @property
    def dissociation_constant(self) -> float:
        """K_D = k_off / k_on."""
        return self.k_off / self.k_on

    def with_k_off(self, k_off: float) -> 'LigandSpec':
        return LigandSpec(self.k_on, k_off, self.label)


@dataclass(frozen=True)
class EquilibriumState:
    """Distribution stationnaire du processus à 3 états."""
    p_unbound: float
    p_bound_signal: float
    p_bound_interferer: float

    @property
    def p_bound(self) -> float:
        return self.p_bound_signal + self.p_bound_interferer

    def as_array(self) -> np.ndarray:
        return np.array([self.p_unbound, self.p_bound_signal, self.p_bound_interferer])


# =============================================================================
# VALIDATION
# =============================================================================

def _check_concentration(name: str, value: ArrayLike) -> None:
    arr = np.asarray(value, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} must be finite, got {value!r}")
    if np.any(arr < 0):
        raise DomainError(f"{name} must be >= 0, got {value!r}")


def _check_ratio(alpha_s: float) -> None:
    if not math.isfinite(alpha_s) or not 0.0 <= alpha_s <= 1.0:
        raise DomainError(f"alpha_s must lie in [0, 1], got {alpha_s!r}")


# =============================================================================
# EQUILIBRIUM
# =============================================================================

def bound_probability(c_s: ArrayLike, c_in: ArrayLike, spec_s: LigandSpec, spec_in: LigandSpec) -> ArrayLike:
    """
    Probabilité qu'un récepteur soit lié à l'équilibre.

    Accepte des scalaires ou des tableaux numpy (diffusés ensemble).

    Args:
        c_s: Concentration du signal
        c_in: Concentration de l'interférent
        spec_s: Cinétique du ligand signal
        spec_in: Cinétique du ligand interférent

    Returns:
        (c_s/K_D^s + c_in/K_D^in) / (1 + c_s/K_D^s + c_in/K_D^in)

    Raises:
        DomainError: Si une concentration est négative ou non finie
    """
    _check_concentration("c_s", c_s)
    _check_concentration("c_in", c_in)
    x = np.asarray(c_s, dtype=float) / spec_s.dissociation_constant \
        + np.asarray(c_in, dtype=float) / spec_in.dissociation_constant
    p = x / (1.0 + x)
    return float(p) if np.ndim(p) == 0 else p


def equilibrium_distribution(c_s: float, c_in: float, spec_s: LigandSpec, spec_in: LigandSpec) -> EquilibriumState:
    """
    Distribution stationnaire du processus à 3 états, forme fermée.

    Raises:
        DomainError: Si une concentration est négative ou non finie
    """
    _check_concentration("c_s", c_s)
    _check_concentration("c_in", c_in)
    a = spec_s.k_on * spec_in.k_off * c_s
    b = spec_s.k_off * spec_in.k_on * c_in
    d = spec_s.k_off * spec_in.k_off
    total = a + b + d
    return EquilibriumState(
        p_unbound=d / total,
        p_bound_signal=a / total,
        p_bound_interferer=b / total,
    )


def rate_matrix(c_s: float, c_in: float, spec_s: LigandSpec, spec_in: LigandSpec) -> np.ndarray:
    """
    Générateur du processus du récepteur, états dans l'ordre (U, B_s, B_in).

    Chaque ligne somme à zéro.
    """
    _check_concentration("c_s", c_s)
    _check_concentration("c_in", c_in)
    on_s = spec_s.k_on * c_s
    on_in = spec_in.k_on * c_in
    return np.array([
        [-(on_s + on_in), on_s, on_in],
        [spec_s.k_off, -spec_s.k_off, 0.0],
        [spec_in.k_off, 0.0, -spec_in.k_off],
    ])


def solve_stationary(generator: np.ndarray) -> np.ndarray:
    """
    Résout theta @ R = 0 avec theta de somme un.

    Args:
        generator: Générateur carré (lignes de somme nulle)

    Returns:
        Vecteur ligne stationnaire

    Raises:
        NumericError: Si le système n'a pas de solution qui soit une probabilité
    """
    size = generator.shape[0]
    system = np.vstack([generator.T, np.ones((1, size))])
    rhs = np.zeros(size + 1)
    rhs[-1] = 1.0
    theta, *_ = np.linalg.lstsq(system, rhs, rcond=None)
    if np.any(theta < -1e-12) or not np.all(np.isfinite(theta)):
        raise NumericError(f"no stationary distribution found: {theta}")
    return np.clip(theta, 0.0, None)


# =============================================================================
# BOUND DURATIONS
# =============================================================================

def bound_duration_density(tau: ArrayLike, alpha_s: float, spec_s: LigandSpec, spec_in: LigandSpec) -> ArrayLike:
    """
    Densité d'une durée liée : mélange de deux exponentielles.

    Args:
        tau: Durée(s), >= 0
        alpha_s: Fraction des liaisons faites par des molécules signal

    Raises:
        DomainError: Si alpha_s sort de [0, 1] ou si tau est négatif
    """
    _check_ratio(alpha_s)
    t = np.asarray(tau, dtype=float)
    if np.any(t < 0):
        raise DomainError("tau must be >= 0")
    density = alpha_s * spec_s.k_off * np.exp(-spec_s.k_off * t) \
        + (1.0 - alpha_s) * spec_in.k_off * np.exp(-spec_in.k_off * t)
    return float(density) if np.ndim(density) == 0 else density


def mean_bound_duration(alpha_s: float, spec_s: LigandSpec, spec_in: LigandSpec) -> float:
    _check_ratio(alpha_s)
    return alpha_s / spec_s.k_off + (1.0 - alpha_s) / spec_in.k_off


def correlation_time(c: float, k_on: float, k_off: float) -> float:
    """Temps de relaxation de la réaction de liaison, 1 / (c·k_on + k_off)."""
    _check_concentration("c", c)
    rate = c * k_on + k_off
    if rate <= 0:
        raise DomainError("c·k_on + k_off must be > 0")
    return 1.0 / rate


def characteristic_frequency(c: float, k_on: float, k_off: float) -> float:
    return 1.0 / correlation_time(c, k_on, k_off)


def affinity_ratio(spec_s: LigandSpec, spec_in: LigandSpec) -> float:
    """eta = k_off(signal) / k_off(interferer)."""
    return spec_s.k_off / spec_in.k_off


def default_time_threshold(spec_in: LigandSpec, nu: float = DEFAULT_NU) -> float:
    """Frontière des bins T1 = nu / k_off(interférent)."""
    if not math.isfinite(nu) or nu <= 0:
        raise DomainError(f"nu must be > 0, got {nu!r}")
    return nu / spec_in.k_off


# =============================================================================
# LIKELIHOOD TERMS
# =============================================================================

def log_likelihood_total(n_samples: int, total_unbound_time: float, c_tot: float, k_on: float) -> float:
    """
    Terme des durées libres de la log-vraisemblance, à une constante près.

    N·ln(k_on·c_tot) − k_on·c_tot·T_u, maximal en c_tot = N/(k_on·T_u).
    """
    if c_tot <= 0:
        raise DomainError("c_tot must be > 0")
    rate = k_on * c_tot
    return n_samples * math.log(rate) - rate * total_unbound_time


def log_likelihood_ratio(durations: Iterable[float], alpha_s: float, spec_s: LigandSpec, spec_in: LigandSpec) -> float:
    """Terme des durées liées de la log-vraisemblance : somme des log-densités du mélange."""
    taus = np.asarray(list(durations) if not isinstance(durations, np.ndarray) else durations, dtype=float)
    density = np.asarray(bound_duration_density(taus, alpha_s, spec_s, spec_in))
    with np.errstate(divide="ignore"):
        return float(np.sum(np.log(density)))
