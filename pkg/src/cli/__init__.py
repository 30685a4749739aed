# -*- coding: utf-8 -*-
"""
CLI module for receptorlab.

This module provides the command-line interface for sweeps, histograms,
CRN validation and single-point BEP evaluation.
"""

from .sim_cli import main as sim_main

__all__ = [
    'sim_main',
]
