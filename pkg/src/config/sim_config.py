# -*- coding: utf-8 -*-
"""
Configuration classes for simulations, sweeps and CRN validation runs.

Every section is a dataclass with ``to_dict``/``from_dict``; the whole
configuration round-trips through YAML. Defaults are the reference
parameter set, so an empty file reproduces the reference scenario.
"""

from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import numpy as np
import yaml

from src.core.binding.kinetics import LigandRole, LigandSpec
from src.core.binding.sampler import ChannelScenario
from src.core.crn.receptors import TransductionMode
from src.core.detection.detectors import ALL_KINDS, StatisticKind
from src.core.detection.estimators import VarianceMethod
from src.core.errors import ConfigError, DomainError

# =============================================================================
# ENUMS
# =============================================================================

class Axis(Enum):
    """Parameter varied by a sweep."""
    INTERFERER_CONC = "interferer"   # mean c_in in units of K_D(interferer)
    AFFINITY_RATIO = "affinity"      # k_off(signal) / k_off(interferer)
    BIT_RATIO = "bit-ratio"          # c_bit0 / c_bit1, c_bit1 fixed
    RECEPTOR_COUNT = "receptors"     # N_R

    @classmethod
    def from_name(cls, name: str) -> 'Axis':
        key = name.strip().lower().replace("_", "-")
        for axis in cls:
            if key in (axis.value, axis.name.lower().replace("_", "-")):
                return axis
        raise ConfigError(f"unknown axis: {name!r}")


def parse_detectors(names) -> List[StatisticKind]:
    """Parse a comma string or a list of detector names."""
    if isinstance(names, str):
        names = [n for n in names.split(",") if n.strip()]
    try:
        kinds = [StatisticKind.from_name(n) if isinstance(n, str) else StatisticKind(n) for n in names]
    except (DomainError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    if not kinds:
        raise ConfigError("at least one detector is required")
    return list(dict.fromkeys(kinds))


# =============================================================================
# SUB-CONFIGURATIONS
# =============================================================================

@dataclass
class ScenarioConfig:
    """
    Channel parameters (canonical units).

    Attributes:
        k_on: Binding rate of both ligands (μm³/s)
        k_off_signal: Unbinding rate of signal molecules (1/s)
        affinity_ratio: k_off(signal) / k_off(interferer)
        c_bit0: Signal concentration for bit 0 (μm⁻³)
        c_bit1: Signal concentration for bit 1 (μm⁻³)
        mean_c_in: Mean interferer concentration (μm⁻³)
        volume: Reception volume (μm³)
        n_receptors: Number of receptors
    """
    k_on: float = 20.0
    k_off_signal: float = 10.0
    affinity_ratio: float = 0.2
    c_bit0: float = 2.0
    c_bit1: float = 2.5
    mean_c_in: float = 5.0
    volume: float = 4000.0
    n_receptors: int = 10_000

    @property
    def kd_signal(self) -> float:
        return self.k_off_signal / self.k_on

    @property
    def kd_interferer(self) -> float:
        return self.k_off_signal / self.affinity_ratio / self.k_on

    def validate(self) -> List[str]:
        errors = []
        for name in ("k_on", "k_off_signal", "affinity_ratio", "volume"):
            if getattr(self, name) <= 0:
                errors.append(f"scenario.{name} must be > 0")
        if self.c_bit0 <= 0:
            errors.append("scenario.c_bit0 must be > 0")
        if self.c_bit1 < self.c_bit0:
            errors.append("scenario.c_bit1 must be >= scenario.c_bit0")
        if self.mean_c_in < 0:
            errors.append("scenario.mean_c_in must be >= 0")
        if int(self.n_receptors) != self.n_receptors or self.n_receptors < 3:
            errors.append("scenario.n_receptors must be an integer >= 3")
        return errors

    def to_scenario(self) -> ChannelScenario:
        spec_s = LigandSpec(self.k_on, self.k_off_signal, LigandRole.SIGNAL)
        spec_in = LigandSpec(self.k_on, self.k_off_signal / self.affinity_ratio, LigandRole.INTERFERER)
        return ChannelScenario(
            c_bit0=self.c_bit0,
            c_bit1=self.c_bit1,
            mean_c_in=self.mean_c_in,
            volume=self.volume,
            n_receptors=int(self.n_receptors),
            spec_s=spec_s,
            spec_in=spec_in,
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            'k_on': self.k_on,
            'k_off_signal': self.k_off_signal,
            'affinity_ratio': self.affinity_ratio,
            'c_bit0': self.c_bit0,
            'c_bit1': self.c_bit1,
            'mean_c_in': self.mean_c_in,
            'volume': self.volume,
            'n_receptors': self.n_receptors,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'ScenarioConfig':
        default = cls()
        return cls(**{key: type(getattr(default, key))(data.get(key, getattr(default, key)))
                      for key in default.to_dict()})


@dataclass
class DetectionConfig:
    """
    Detector settings.

    Attributes:
        detectors: Detector names (DNBR, DRUT, DRBT, DRUBT)
        nu: Bin threshold factor, t1 = nu / k_off(interferer)
        variance_method: ``closed`` or ``exact`` Poisson averaging
    """
    detectors: List[str] = field(default_factory=lambda: [k.value for k in ALL_KINDS])
    nu: float = 3.0
    variance_method: VarianceMethod = VarianceMethod.CLOSED

    @property
    def kinds(self) -> List[StatisticKind]:
        return parse_detectors(self.detectors)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'detectors': list(self.detectors),
            'nu': self.nu,
            'variance_method': self.variance_method.value,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'DetectionConfig':
        detectors = data.get('detectors', [k.value for k in ALL_KINDS])
        if isinstance(detectors, str):
            detectors = [d.strip() for d in detectors.split(",") if d.strip()]
        return cls(
            detectors=list(detectors),
            nu=float(data.get('nu', 3.0)),
            variance_method=VarianceMethod(data.get('variance_method', 'closed')),
        )


@dataclass
class MonteCarloConfig:
    """
    Monte Carlo settings.

    Attributes:
        trials: Bits per measurement (0 = analytic only)
        seed: Root seed of every random stream
        block_size: Trials per independent substream
    """
    trials: int = 100_000
    seed: int = 0
    block_size: int = 4096

    def to_dict(self) -> Dict[str, Any]:
        return {'trials': self.trials, 'seed': self.seed, 'block_size': self.block_size}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'MonteCarloConfig':
        return cls(
            trials=int(data.get('trials', 100_000)),
            seed=int(data.get('seed', 0)),
            block_size=int(data.get('block_size', 4096)),
        )


@dataclass
class CrnConfig:
    """
    Reaction-network validation settings.

    Attributes:
        symbols: Number of symbols pushed through the networks
        kappa: Proofreading factor, beta = kappa / t1
        transduction: ``ideal`` or ``kpr`` duration split used for decisions
        s_rate: S release rate per second of unbound time
        s_amplification: Amplification of S (consumption rate becomes k_on/A)
        threshold_amplification: Scale of Y production and threshold (None = automatic)
        comparator_rate: Comparator annihilation rate
        ode_rtol, ode_atol: Integrator tolerances
        t_end: Integration horizon (s)
        ode_check_symbols: Symbols whose networks are integrated numerically
    """
    symbols: int = 10_000
    kappa: float = 0.6
    transduction: TransductionMode = TransductionMode.IDEAL
    s_rate: float = 1.0
    s_amplification: float = 1000.0
    threshold_amplification: Optional[float] = None
    comparator_rate: float = 1.0
    ode_rtol: float = 1e-9
    ode_atol: float = 1e-12
    t_end: float = 1.0
    ode_check_symbols: int = 50

    def to_dict(self) -> Dict[str, Any]:
        return {
            'symbols': self.symbols,
            'kappa': self.kappa,
            'transduction': self.transduction.value,
            's_rate': self.s_rate,
            's_amplification': self.s_amplification,
            'threshold_amplification': self.threshold_amplification,
            'comparator_rate': self.comparator_rate,
            'ode_rtol': self.ode_rtol,
            'ode_atol': self.ode_atol,
            't_end': self.t_end,
            'ode_check_symbols': self.ode_check_symbols,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'CrnConfig':
        amplification = data.get('threshold_amplification')
        return cls(
            symbols=int(data.get('symbols', 10_000)),
            kappa=float(data.get('kappa', 0.6)),
            transduction=TransductionMode(data.get('transduction', 'ideal')),
            s_rate=float(data.get('s_rate', 1.0)),
            s_amplification=float(data.get('s_amplification', 1000.0)),
            threshold_amplification=None if amplification is None else float(amplification),
            comparator_rate=float(data.get('comparator_rate', 1.0)),
            ode_rtol=float(data.get('ode_rtol', 1e-9)),
            ode_atol=float(data.get('ode_atol', 1e-12)),
            t_end=float(data.get('t_end', 1.0)),
            ode_check_symbols=int(data.get('ode_check_symbols', 50)),
        )


@dataclass
class HistogramConfig:
    """Histogram suite settings."""
    iterations: int = 50_000
    bins: int = 60
    bit: int = 0

    def to_dict(self) -> Dict[str, Any]:
        return {'iterations': self.iterations, 'bins': self.bins, 'bit': self.bit}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'HistogramConfig':
        return cls(
            iterations=int(data.get('iterations', 50_000)),
            bins=int(data.get('bins', 60)),
            bit=int(data.get('bit', 0)),
        )


@dataclass
class SweepConfig:
    """
    Sweep grid.

    Attributes:
        preset: Named sweep (see ``PRESETS``); applied before explicit keys
        axis: Swept parameter
        start, stop, points: Grid bounds and size
        log_spaced: Geometric instead of linear spacing
        values: Explicit grid (overrides start/stop/points)
    """
    preset: Optional[str] = None
    axis: Axis = Axis.INTERFERER_CONC
    start: float = 1.0
    stop: float = 10.0
    points: int = 20
    log_spaced: bool = False
    values: List[float] = field(default_factory=list)

    def resolved_values(self) -> List[float]:
        if self.values:
            values = [float(v) for v in self.values]
        elif self.log_spaced:
            values = np.geomspace(self.start, self.stop, self.points).tolist()
        else:
            values = np.linspace(self.start, self.stop, self.points).tolist()
        if self.axis is Axis.RECEPTOR_COUNT:
            values = sorted({int(round(v)) for v in values})
        return values

    def to_dict(self) -> Dict[str, Any]:
        return {
            'preset': self.preset,
            'axis': self.axis.value,
            'start': self.start,
            'stop': self.stop,
            'points': self.points,
            'log_spaced': self.log_spaced,
            'values': [float(v) for v in self.values],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'SweepConfig':
        return cls(
            preset=data.get('preset'),
            axis=Axis.from_name(data.get('axis', 'interferer')),
            start=float(data.get('start', 1.0)),
            stop=float(data.get('stop', 10.0)),
            points=int(data.get('points', 20)),
            log_spaced=bool(data.get('log_spaced', False)),
            values=[float(v) for v in data.get('values', [])],
        )


@dataclass
class OutputConfig:
    """Output files."""
    output_path: str = "results/sweep.csv"
    write_json: bool = False

    def to_dict(self) -> Dict[str, Any]:
        return {'output_path': self.output_path, 'write_json': self.write_json}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'OutputConfig':
        return cls(
            output_path=str(data.get('output_path', "results/sweep.csv")),
            write_json=bool(data.get('write_json', False)),
        )


@dataclass
class PerformanceConfig:
    """
    Performance configuration.

    Attributes:
        max_workers: Parallel workers (0 = auto)
        show_progress: Show progress bar
    """
    max_workers: int = 0
    show_progress: bool = True

    @property
    def workers(self) -> int:
        if self.max_workers > 0:
            return self.max_workers
        import os
        return min(8, os.cpu_count() or 1)

    def to_dict(self) -> Dict[str, Any]:
        return {'max_workers': self.max_workers, 'show_progress': self.show_progress}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'PerformanceConfig':
        return cls(
            max_workers=int(data.get('max_workers', 0)),
            show_progress=bool(data.get('show_progress', True)),
        )


@dataclass
class LoggingConfig:
    """
    Logging configuration.

    Attributes:
        level: Log level (DEBUG, INFO, WARNING, ERROR)
        log_to_file: Write logs to file
        log_file: Log file name (auto-generated if None)
        verbose: Verbosity level (0-3)
    """
    level: str = "INFO"
    log_to_file: bool = False
    log_file: Optional[str] = None
    verbose: int = 1

    def to_dict(self) -> Dict[str, Any]:
        return {
            'level': self.level,
            'log_to_file': self.log_to_file,
            'log_file': self.log_file,
            'verbose': self.verbose,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'LoggingConfig':
        return cls(
            level=data.get('level', 'INFO'),
            log_to_file=data.get('log_to_file', False),
            log_file=data.get('log_file'),
            verbose=data.get('verbose', 1),
        )


# =============================================================================
# SWEEP SPECIFICATION
# =============================================================================

@dataclass
class SweepSpec:
    """
    Everything needed to run one sweep.

    Attributes:
        base_scenario: Scenario the axis values are applied to
        axis: Swept parameter
        values: Strictly monotone grid
        detectors: Detectors evaluated at every point
        mc_trials: Monte Carlo bits per point (0 = analytic only)
        seed: Root seed
        output_path: CSV destination (None = no files)
    """
    base_scenario: ChannelScenario
    axis: Axis
    values: List[float]
    detectors: List[StatisticKind] = field(default_factory=lambda: list(ALL_KINDS))
    mc_trials: int = 0
    seed: int = 0
    output_path: Optional[str] = None

    def validate(self) -> List[str]:
        errors = []
        if not self.values:
            errors.append("sweep needs at least one value")
        diffs = np.diff(np.asarray(self.values, dtype=float))
        if len(diffs) and not (np.all(diffs > 0) or np.all(diffs < 0)):
            errors.append("sweep values must be strictly monotone")
        if self.mc_trials < 0:
            errors.append("mc_trials must be >= 0")
        elif 0 < self.mc_trials < 1000:
            errors.append("mc_trials must be 0 or >= 1000")
        if not self.detectors:
            errors.append("at least one detector is required")
        return errors


# =============================================================================
# PRESETS
# =============================================================================

def _interference(config: 'SimulationConfig', saturated: bool) -> None:
    kd = config.scenario.kd_signal
    c0, c1 = (19.0, 20.0) if saturated else (4.0, 5.0)
    config.scenario.c_bit0 = c0 * kd
    config.scenario.c_bit1 = c1 * kd
    config.sweep = SweepConfig(preset=config.sweep.preset, axis=Axis.INTERFERER_CONC, start=1.0, stop=10.0, points=20)


def _affinity(config: 'SimulationConfig', high: bool) -> None:
    config.scenario.k_off_signal = 10.0
    config.scenario.mean_c_in = 5.0
    if high:
        config.sweep = SweepConfig(preset=config.sweep.preset, axis=Axis.AFFINITY_RATIO,
                                   start=1.1, stop=10.0, points=20, log_spaced=True)
    else:
        config.sweep = SweepConfig(preset=config.sweep.preset, axis=Axis.AFFINITY_RATIO,
                                   start=0.05, stop=0.95, points=20)


def _bit_ratio(config: 'SimulationConfig') -> None:
    config.sweep = SweepConfig(preset=config.sweep.preset, axis=Axis.BIT_RATIO, start=0.1, stop=0.99, points=20)


def _receptors(config: 'SimulationConfig') -> None:
    config.sweep = SweepConfig(preset=config.sweep.preset, axis=Axis.RECEPTOR_COUNT,
                               start=100, stop=100_000, points=13, log_spaced=True)


PRESETS: Dict[str, Callable[['SimulationConfig'], None]] = {
    'interference': lambda c: _interference(c, saturated=False),
    'interference-saturated': lambda c: _interference(c, saturated=True),
    'affinity-low': lambda c: _affinity(c, high=False),
    'affinity-high': lambda c: _affinity(c, high=True),
    'bit-ratio': _bit_ratio,
    'receptors': _receptors,
}


# =============================================================================
# MAIN CONFIGURATION
# =============================================================================

@dataclass
class SimulationConfig:
    """Complete configuration of a receptorlab run."""
    scenario: ScenarioConfig = field(default_factory=ScenarioConfig)
    detection: DetectionConfig = field(default_factory=DetectionConfig)
    monte_carlo: MonteCarloConfig = field(default_factory=MonteCarloConfig)
    crn: CrnConfig = field(default_factory=CrnConfig)
    histogram: HistogramConfig = field(default_factory=HistogramConfig)
    sweep: SweepConfig = field(default_factory=SweepConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    performance: PerformanceConfig = field(default_factory=PerformanceConfig)
    logging: LoggingConfig = field(default_factory=LoggingConfig)

    def apply_preset(self, name: str) -> None:
        """Overwrite scenario and sweep keys with a named preset."""
        if name not in PRESETS:
            raise ConfigError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
        self.sweep.preset = name
        PRESETS[name](self)

    def validate(self) -> List[str]:
        """Validate configuration and return list of errors."""
        errors = self.scenario.validate()
        try:
            self.detection.kinds
        except ConfigError as exc:
            errors.append(str(exc))
        if self.detection.nu <= 0:
            errors.append("detection.nu must be > 0")
        if self.monte_carlo.trials < 0 or 0 < self.monte_carlo.trials < 1000:
            errors.append("monte_carlo.trials must be 0 or >= 1000")
        if self.monte_carlo.block_size <= 0:
            errors.append("monte_carlo.block_size must be > 0")
        if self.crn.symbols < 100:
            errors.append("crn.symbols must be >= 100")
        if self.crn.s_amplification < 1:
            errors.append("crn.s_amplification must be >= 1")
        if self.crn.kappa < 0:
            errors.append("crn.kappa must be >= 0")
        if self.histogram.iterations < 1000:
            errors.append("histogram.iterations must be >= 1000")
        if self.histogram.bit not in (0, 1):
            errors.append("histogram.bit must be 0 or 1")
        if self.sweep.preset is not None and self.sweep.preset not in PRESETS:
            errors.append(f"unknown preset: {self.sweep.preset}")
        if not self.sweep.values and self.sweep.points < 1:
            errors.append("sweep.points must be >= 1")
        if self.sweep.log_spaced and min(self.sweep.start, self.sweep.stop) <= 0:
            errors.append("log-spaced sweeps need positive bounds")
        return errors

    def build_scenario(self) -> ChannelScenario:
        """
        Raises:
            ConfigError: If the configuration is invalid
        """
        errors = self.scenario.validate()
        if errors:
            raise ConfigError("; ".join(errors), errors)
        try:
            return self.scenario.to_scenario()
        except DomainError as exc:
            raise ConfigError(str(exc)) from exc

    def sweep_spec(self) -> SweepSpec:
        """
        Raises:
            ConfigError: If the resulting specification is invalid
        """
        errors = self.validate()
        if errors:
            raise ConfigError("; ".join(errors), errors)
        spec = SweepSpec(
            base_scenario=self.build_scenario(),
            axis=self.sweep.axis,
            values=self.sweep.resolved_values(),
            detectors=self.detection.kinds,
            mc_trials=self.monte_carlo.trials,
            seed=self.monte_carlo.seed,
            output_path=self.output.output_path,
        )
        errors = spec.validate()
        if errors:
            raise ConfigError("; ".join(errors), errors)
        return spec

    def to_dict(self) -> Dict[str, Any]:
        return {
            'scenario': self.scenario.to_dict(),
            'detection': self.detection.to_dict(),
            'monte_carlo': self.monte_carlo.to_dict(),
            'crn': self.crn.to_dict(),
            'histogram': self.histogram.to_dict(),
            'sweep': self.sweep.to_dict(),
            'output': self.output.to_dict(),
            'performance': self.performance.to_dict(),
            'logging': self.logging.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'SimulationConfig':
        """
        Build a configuration; a ``sweep.preset`` is applied first, explicit keys win.

        Raises:
            ConfigError: If a value cannot be parsed
        """
        data = data or {}
        try:
            config = cls(
                scenario=ScenarioConfig.from_dict(data.get('scenario', {})),
                detection=DetectionConfig.from_dict(data.get('detection', {})),
                monte_carlo=MonteCarloConfig.from_dict(data.get('monte_carlo', {})),
                crn=CrnConfig.from_dict(data.get('crn', {})),
                histogram=HistogramConfig.from_dict(data.get('histogram', {})),
                sweep=SweepConfig.from_dict(data.get('sweep', {})),
                output=OutputConfig.from_dict(data.get('output', {})),
                performance=PerformanceConfig.from_dict(data.get('performance', {})),
                logging=LoggingConfig.from_dict(data.get('logging', {})),
            )
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid configuration value: {exc}") from exc

        preset = (data.get('sweep') or {}).get('preset')
        if preset:
            config.apply_preset(preset)
            explicit_scenario = data.get('scenario') or {}
            for key, value in explicit_scenario.items():
                if hasattr(config.scenario, key):
                    setattr(config.scenario, key, type(getattr(config.scenario, key))(value))
            explicit_sweep = {k: v for k, v in (data.get('sweep') or {}).items() if k != 'preset'}
            if explicit_sweep:
                merged = {**config.sweep.to_dict(), **explicit_sweep}
                config.sweep = SweepConfig.from_dict(merged)
        return config


def load_config_from_yaml(file_path: str) -> SimulationConfig:
    """
    Load configuration from a YAML file.

    Raises:
        FileNotFoundError: If the file doesn't exist
        ConfigError: If the file is not valid YAML or holds invalid values
    """
    with open(file_path, 'r', encoding='utf-8') as f:
        try:
            data = yaml.safe_load(f)
        except yaml.YAMLError as exc:
            raise ConfigError(f"invalid YAML in {file_path}: {exc}") from exc
    if data is not None and not isinstance(data, dict):
        raise ConfigError(f"{file_path}: top level must be a mapping")
    return SimulationConfig.from_dict(data or {})


def save_config_to_yaml(config: SimulationConfig, file_path: str) -> None:
    """Save configuration to a YAML file."""
    Path(file_path).parent.mkdir(parents=True, exist_ok=True)

    with open(file_path, 'w', encoding='utf-8') as f:
        yaml.dump(
            config.to_dict(),
            f,
            default_flow_style=False,
            allow_unicode=True,
            sort_keys=False,
        )
