# -*- coding: utf-8 -*-
"""
Vérification de l'approximation gaussienne des quatre statistiques de décision.

Tire de nombreux symboles pour un bit, construit l'histogramme de chaque
statistique et compare l'échantillon à la gaussienne calculée (moyenne,
variance) ainsi qu'à une gaussienne ajustée sur l'échantillon lui-même.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, Optional

import numpy as np
from scipy import stats

from src.core.binding.kinetics import DEFAULT_NU
from src.core.binding.sampler import ChannelScenario, make_rng, sample_symbols
from src.core.detection.detectors import (
    ALL_KINDS,
    StatisticKind,
    bin_threshold,
    binning_for,
    statistic_moments,
    statistic_values,
)
from src.core.detection.estimators import GaussianMoments, VarianceMethod
from src.core.errors import DomainError

logger = logging.getLogger(__name__)

MIN_ITERATIONS = 1000
HISTOGRAM_STREAM = 7


@dataclass
class StatisticHistogram:
    """Histogramme et comparaison des moments d'une statistique."""
    kind: StatisticKind
    counts: np.ndarray
    edges: np.ndarray
    analytic: GaussianMoments
    sample_mean: float
    sample_variance: float
    mean_stderr: float
    variance_stderr: float
    ks_fitted: float
    ks_analytic: float

    @property
    def mean_z(self) -> float:
        """Moyenne empirique moins moyenne analytique, en erreurs standard."""
        return (self.sample_mean - self.analytic.mean) / self.mean_stderr

    @property
    def variance_z(self) -> float:
        return (self.sample_variance - self.analytic.variance) / self.variance_stderr

    @property
    def density(self) -> np.ndarray:
        widths = np.diff(self.edges)
        return self.counts / (self.counts.sum() * widths)

    def overlay(self) -> np.ndarray:
        """Densité gaussienne analytique aux centres des bins."""
        centres = 0.5 * (self.edges[:-1] + self.edges[1:])
        return stats.norm.pdf(centres, self.analytic.mean, self.analytic.std)

    def to_dict(self) -> dict:
        return {
            'statistic': self.kind.value,
            'analytic_mean': self.analytic.mean,
            'analytic_variance': self.analytic.variance,
            'sample_mean': self.sample_mean,
            'sample_variance': self.sample_variance,
            'mean_z': self.mean_z,
            'variance_z': self.variance_z,
            'ks_fitted': self.ks_fitted,
            'ks_analytic': self.ks_analytic,
        }


@dataclass
class HistogramReport:
    scenario: ChannelScenario
    bit: int
    iterations: int
    seed: int
    histograms: Dict[StatisticKind, StatisticHistogram] = field(default_factory=dict)
    files: Dict[str, str] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            'bit': self.bit,
            'iterations': self.iterations,
            'seed': self.seed,
            'scenario': self.scenario.to_dict(),
            'statistics': [h.to_dict() for h in self.histograms.values()],
        }


def _histogram(
    kind: StatisticKind,
    values: np.ndarray,
    analytic: GaussianMoments,
    bins: int,
) -> StatisticHistogram:
    n = len(values)
    mean = float(values.mean())
    variance = float(values.var(ddof=1))
    centred = values - mean
    fourth = float(np.mean(centred ** 4))
    # asymptotic standard error of the sample variance
    variance_stderr = math.sqrt(max(fourth - variance ** 2, 0.0) / n) or math.inf
    counts, edges = np.histogram(values, bins=bins)
    return StatisticHistogram(
        kind=kind,
        counts=counts,
        edges=edges,
        analytic=analytic,
        sample_mean=mean,
        sample_variance=variance,
        mean_stderr=math.sqrt(variance / n),
        variance_stderr=variance_stderr,
        ks_fitted=float(stats.kstest(values, 'norm', args=(mean, math.sqrt(variance))).statistic),
        ks_analytic=float(stats.kstest(values, 'norm', args=(analytic.mean, analytic.std)).statistic),
    )


def emit_histograms(
    scenario: ChannelScenario,
    bit: int,
    iterations: int,
    seed: int = 0,
    kinds: Iterable[StatisticKind] = ALL_KINDS,
    bins: int = 60,
    nu: float = DEFAULT_NU,
    method: VarianceMethod = VarianceMethod.CLOSED,
    output_path: Optional[str] = None,
) -> HistogramReport:
    """
    Histogramme de chaque statistique sur ``iterations`` symboles d'un bit.

    Toutes les statistiques sont évaluées sur les mêmes symboles. Si
    ``output_path`` est fourni, un CSV des histogrammes et un résumé JSON sont écrits.

    Raises:
        DomainError: Si iterations < 1000 ou si bit n'est pas 0/1
    """
    if iterations < MIN_ITERATIONS:
        raise DomainError(f"iterations must be >= {MIN_ITERATIONS}, got {iterations}")
    if bit not in (0, 1):
        raise DomainError(f"bit must be 0 or 1, got {bit!r}")
    kinds = list(kinds)
    scheme = binning_for(scenario, kinds, nu)
    rng = make_rng(seed, HISTOGRAM_STREAM, bit)
    batch = sample_symbols(scenario, np.full(iterations, bit), rng, t1=bin_threshold(scenario, scheme, nu))

    report = HistogramReport(scenario=scenario, bit=bit, iterations=iterations, seed=seed)
    for kind in kinds:
        values = statistic_values(batch, kind, scenario, scheme)
        analytic = statistic_moments(scenario, kind, bit, scheme, nu, method)
        histogram = _histogram(kind, values, analytic, bins)
        report.histograms[kind] = histogram
        logger.info(
            "%s bit %d: mean z=%+.2f, variance z=%+.2f, KS=%.4f",
            kind.value, bit, histogram.mean_z, histogram.variance_z, histogram.ks_fitted,
        )

    if output_path:
        from src.reports.sweep_reporter import write_histogram_csv, write_json
        report.files['csv'] = write_histogram_csv(report, output_path)
        report.files['json'] = write_json(report.to_dict(), output_path)
    return report
