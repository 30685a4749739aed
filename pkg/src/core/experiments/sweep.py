# -*- coding: utf-8 -*-
"""
Balayages de paramètres.

Un balayage applique chaque valeur d'un axe à un scénario de base et donne,
pour chaque point et chaque détecteur, la BEP analytique et, en option,
une estimation Monte Carlo. Les points tournent en parallèle ; le point ``i``
tire toujours dans le sous-flux ``(seed, i, block)`` : les résultats ne
dépendent pas du nombre de workers.
"""

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

from src.config.sim_config import Axis, SweepSpec
from src.core.binding.kinetics import DEFAULT_NU
from src.core.binding.sampler import ChannelScenario
from src.core.detection.detectors import (
    BINNED_KINDS,
    DEFAULT_BLOCK_SIZE,
    DecisionModel,
    StatisticKind,
    analytic_bep,
    binning_for,
    build_decision_model,
    monte_carlo_bep_all,
)
from src.core.detection.estimators import VarianceMethod
from src.core.errors import ConfigError, DomainError, SingularityError

logger = logging.getLogger(__name__)

DETECTOR_COLUMNS = ('analytic_bep', 'mc_bep', 'mc_ci95', 'threshold', 'mean0', 'var0', 'mean1', 'var1')


def sweep_columns(kinds: List[StatisticKind]) -> List[str]:
    """Ordre des colonnes d'une table de balayage."""
    columns = ['axis_value', 'p_bound_bit0', 'p_bound_bit1']
    for kind in kinds:
        columns.extend(f"{kind.value}_{name}" for name in DETECTOR_COLUMNS)
    return columns


def apply_axis(scenario: ChannelScenario, axis: Axis, value: float) -> ChannelScenario:
    """
    Scénario d'un point de balayage.

    Raises:
        ConfigError: Si la valeur n'est pas valide pour l'axe
    """
    try:
        if axis is Axis.INTERFERER_CONC:
            if value < 0:
                raise ConfigError(f"interferer level must be >= 0, got {value}")
            return scenario.with_interferer_level(value)
        if axis is Axis.AFFINITY_RATIO:
            if value <= 0:
                raise ConfigError(f"affinity ratio must be > 0, got {value}")
            return scenario.with_affinity_ratio(value)
        if axis is Axis.BIT_RATIO:
            if not 0 < value <= 1:
                raise ConfigError(f"bit ratio must lie in (0, 1], got {value}")
            return scenario.with_bit_ratio(value)
        if value != int(value) or value < 3:
            raise ConfigError(f"receptor count must be an integer >= 3, got {value}")
        return scenario.with_receptors(int(value))
    except DomainError as exc:
        raise ConfigError(f"{axis.value}={value}: {exc}") from exc


# =============================================================================
# RESULTS
# =============================================================================

@dataclass
class DetectorPoint:
    """Un détecteur en un point de balayage."""
    analytic_bep: float
    threshold: float
    mean0: float
    var0: float
    mean1: float
    var1: float
    mc_bep: float = math.nan
    mc_ci95: float = math.nan

    @classmethod
    def from_model(cls, model: DecisionModel) -> 'DetectorPoint':
        return cls(
            analytic_bep=analytic_bep(model),
            threshold=model.threshold,
            mean0=model.moments_bit0.mean,
            var0=model.moments_bit0.variance,
            mean1=model.moments_bit1.mean,
            var1=model.moments_bit1.variance,
        )

    def as_columns(self) -> Dict[str, float]:
        return {name: getattr(self, name) for name in DETECTOR_COLUMNS}


@dataclass
class SweepRow:
    """Résultats pour une valeur de l'axe."""
    axis_value: float
    p_bound_bit0: float
    p_bound_bit1: float
    detectors: Dict[StatisticKind, DetectorPoint] = field(default_factory=dict)

    def to_record(self, kinds: List[StatisticKind]) -> Dict[str, float]:
        record = {
            'axis_value': self.axis_value,
            'p_bound_bit0': self.p_bound_bit0,
            'p_bound_bit1': self.p_bound_bit1,
        }
        for kind in kinds:
            for name, value in self.detectors[kind].as_columns().items():
                record[f"{kind.value}_{name}"] = value
        return record


@dataclass
class SweepResult:
    """Lignes dans l'ordre de l'axe, plus le suivi d'exécution."""
    spec: SweepSpec
    rows: List[SweepRow] = field(default_factory=list)
    duration: float = 0.0
    cancelled: bool = False
    files: Dict[str, str] = field(default_factory=dict)

    @property
    def columns(self) -> List[str]:
        return sweep_columns(self.spec.detectors)

    def records(self) -> List[Dict[str, float]]:
        return [row.to_record(self.spec.detectors) for row in self.rows]

    def series(self, kind: StatisticKind, column: str = 'analytic_bep') -> List[float]:
        return [getattr(row.detectors[kind], column) for row in self.rows]


# =============================================================================
# RUNNER
# =============================================================================

class SweepRunner:
    """
    Évalue un balayage point par point.

    Features:
    - Analytic BEP, threshold and moments for every detector
    - Monte Carlo BEP on shared symbols when ``mc_trials`` > 0
    - Parallel points, deterministic for a given seed
    - Progress callbacks and cancellation support
    """

    def __init__(
        self,
        spec: SweepSpec,
        nu: float = DEFAULT_NU,
        method: VarianceMethod = VarianceMethod.CLOSED,
        max_workers: int = 1,
        block_size: int = DEFAULT_BLOCK_SIZE,
    ):
        """
        Raises:
            ConfigError: Si la définition du balayage est invalide
        """
        errors = spec.validate()
        if errors:
            raise ConfigError("; ".join(errors), errors)
        self.spec = spec
        self.nu = nu
        self.method = method
        self.max_workers = max(1, int(max_workers))
        self.block_size = block_size
        self._cancel_requested = False

    def scenarios(self) -> List[ChannelScenario]:
        """Scénario de chaque point, validé avant tout calcul."""
        return [apply_axis(self.spec.base_scenario, self.spec.axis, v) for v in self.spec.values]

    def evaluate_point(self, index: int, scenario: ChannelScenario) -> SweepRow:
        """
        Raises:
            ConfigError: Si un détecteur ne peut pas être construit en ce point
        """
        value = self.spec.values[index]
        try:
            scheme = binning_for(scenario, self.spec.detectors, self.nu)
        except SingularityError as exc:
            needs_bins = sorted(k.value for k in BINNED_KINDS & set(self.spec.detectors))
            raise ConfigError(f"{self.spec.axis.value}={value}: {', '.join(needs_bins)} undefined ({exc})") from exc

        models = {
            kind: build_decision_model(scenario, kind, scheme, self.nu, self.method)
            for kind in self.spec.detectors
        }
        p0, p1 = scenario.saturation()
        row = SweepRow(axis_value=value, p_bound_bit0=float(p0), p_bound_bit1=float(p1))
        for kind, model in models.items():
            row.detectors[kind] = DetectorPoint.from_model(model)

        if self.spec.mc_trials > 0:
            results = monte_carlo_bep_all(
                scenario, self.spec.detectors, self.spec.mc_trials,
                seed=self.spec.seed, key=(index,), nu=self.nu, method=self.method,
                block_size=self.block_size, models=models,
            )
            for kind, result in results.items():
                row.detectors[kind].mc_bep = result.mc_bep
                row.detectors[kind].mc_ci95 = result.mc_ci95
        logger.debug("%s=%r done", self.spec.axis.value, value)
        return row

    def run(self, progress_callback: Optional[Callable[[int, int, str], None]] = None) -> SweepResult:
        """
        Évalue tous les points.

        Args:
            progress_callback: Callback de progression (current, total, message)

        Returns:
            SweepResult, lignes dans l'ordre de l'axe
        """
        self._cancel_requested = False
        start = time.perf_counter()
        scenarios = self.scenarios()
        total = len(scenarios)
        result = SweepResult(spec=self.spec)
        logger.info(
            "Sweep over %s: %d points, detectors %s, %d MC trials per point",
            self.spec.axis.value, total, ",".join(k.value for k in self.spec.detectors), self.spec.mc_trials,
        )

        rows: List[Optional[SweepRow]] = [None] * total
        with ThreadPoolExecutor(max_workers=self.max_workers) as executor:
            futures = [executor.submit(self._guarded, i, s) for i, s in enumerate(scenarios)]
            for index, future in enumerate(futures):
                rows[index] = future.result()
                if progress_callback:
                    progress_callback(index + 1, total, f"{self.spec.axis.value}={self.spec.values[index]:g}")

        result.rows = [row for row in rows if row is not None]
        result.cancelled = self._cancel_requested
        result.duration = time.perf_counter() - start
        logger.info("Sweep finished in %.1fs", result.duration)
        return result

    def _guarded(self, index: int, scenario: ChannelScenario) -> Optional[SweepRow]:
        if self._cancel_requested:
            return None
        return self.evaluate_point(index, scenario)

    def cancel(self):
        """Saute les points pas encore démarrés."""
        self._cancel_requested = True


def run_sweep(
    spec: SweepSpec,
    nu: float = DEFAULT_NU,
    method: VarianceMethod = VarianceMethod.CLOSED,
    max_workers: int = 1,
    block_size: int = DEFAULT_BLOCK_SIZE,
    progress_callback: Optional[Callable[[int, int, str], None]] = None,
    write_json: bool = False,
) -> SweepResult:
    """
    Exécute un balayage et écrit sa table si ``spec.output_path`` est défini.

    Raises:
        ConfigError: Si une valeur d'axe ou une combinaison de détecteurs est invalide
    """
    runner = SweepRunner(spec, nu=nu, method=method, max_workers=max_workers, block_size=block_size)
    result = runner.run(progress_callback)
    if spec.output_path:
        from src.reports.sweep_reporter import SweepReporter
        reporter = SweepReporter.for_path(result, spec.output_path, nu=nu, method=method)
        result.files['csv'] = reporter.generate_csv()
        if write_json:
            result.files['json'] = reporter.generate_json()
    return result
