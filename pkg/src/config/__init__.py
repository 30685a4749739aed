# -*- coding: utf-8 -*-
"""
Configuration module for receptorlab.

This module provides the simulation configuration, sweep presets and
YAML-based configuration loading.
"""

from .sim_config import (
    PRESETS,
    # Enums
    Axis,
    CrnConfig,
    DetectionConfig,
    HistogramConfig,
    LoggingConfig,
    MonteCarloConfig,
    OutputConfig,
    PerformanceConfig,
    # Sub-configurations
    ScenarioConfig,
    # Main configuration
    SimulationConfig,
    SweepConfig,
    SweepSpec,
    # Loaders
    load_config_from_yaml,
    parse_detectors,
    save_config_to_yaml,
)

__all__ = [
    # Main configuration
    'SimulationConfig',
    'SweepSpec',
    'PRESETS',

    # Sub-configurations
    'ScenarioConfig',
    'DetectionConfig',
    'MonteCarloConfig',
    'CrnConfig',
    'HistogramConfig',
    'SweepConfig',
    'OutputConfig',
    'PerformanceConfig',
    'LoggingConfig',

    # Enums
    'Axis',

    # Loaders
    'load_config_from_yaml',
    'save_config_to_yaml',
    'parse_detectors',
]
