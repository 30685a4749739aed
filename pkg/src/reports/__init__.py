# -*- coding: utf-8 -*-
"""
Reports module for receptorlab.

This module writes sweep tables, histograms and CRN validation summaries
in CSV, JSON, and TXT formats.
"""

from .sweep_reporter import (
    SweepReporter,
    read_sweep_csv,
    write_histogram_csv,
    write_json,
)

__all__ = [
    'SweepReporter',
    'read_sweep_csv',
    'write_histogram_csv',
    'write_json',
]
