# -*- coding: utf-8 -*-
"""
Report generation for sweeps, histograms and CRN validation runs.

Sweep tables are written as CSV with a fixed, versioned schema, plus an
optional JSON mirror and a human-readable TXT summary. Data files carry
no timestamps: the same sweep and seed always produce the same bytes.
"""

import csv
import json
import logging
import math
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from src.core.detection.estimators import VarianceMethod

logger = logging.getLogger(__name__)

SCHEMA_LINE = "# receptorlab-sweep v1"
HISTOGRAM_SCHEMA_LINE = "# receptorlab-histogram v1"


def _cell(value: Any) -> str:
    """repr for floats so values survive a round trip exactly."""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _json_safe(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {k: _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    return value


def _with_suffix(path: Union[str, Path], suffix: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    return path.with_suffix(suffix)


class SweepReporter:
    """
    Report generator for sweep results.

    Supports CSV, JSON, and human-readable TXT formats.
    """

    def __init__(
        self,
        result,
        output_dir: Optional[str] = None,
        base_filename: str = "sweep",
        nu: Optional[float] = None,
        method: Optional[VarianceMethod] = None,
    ):
        """
        Initialize the reporter.

        Args:
            result: SweepResult to report
            output_dir: Directory for output files (defaults to current dir)
            base_filename: Base name for report files
            nu: Bin threshold factor used, recorded in JSON/TXT
            method: Variance method used, recorded in JSON/TXT
        """
        self.result = result
        self.output_dir = Path(output_dir) if output_dir else Path.cwd()
        self.base_filename = base_filename
        self.nu = nu
        self.method = method

        self.output_dir.mkdir(parents=True, exist_ok=True)

    @classmethod
    def for_path(cls, result, path: str, **kwargs) -> 'SweepReporter':
        path = Path(path)
        return cls(result, output_dir=str(path.parent), base_filename=path.stem, **kwargs)

    def _get_timestamp(self) -> str:
        return datetime.now().strftime("%Y%m%d_%H%M%S")

    def _filepath(self, suffix: str, include_timestamp: bool) -> Path:
        timestamp = f"_{self._get_timestamp()}" if include_timestamp else ""
        return self.output_dir / f"{self.base_filename}{timestamp}{suffix}"

    def generate_csv(self, include_timestamp: bool = False) -> str:
        """
        Generate the sweep table.

        Format: a ``# receptorlab-sweep v1`` line, the header
        ``axis_value,p_bound_bit0,p_bound_bit1,<DET>_analytic_bep,...`` and
        one row per axis value. Missing Monte Carlo values are written as ``nan``.

        Returns:
            Path to generated CSV file
        """
        filepath = self._filepath(".csv", include_timestamp)
        columns = self.result.columns

        try:
            with open(filepath, 'w', newline='', encoding='utf-8') as f:
                f.write(SCHEMA_LINE + "\n")
                writer = csv.writer(f)
                writer.writerow(columns)
                for record in self.result.records():
                    writer.writerow([_cell(record[name]) for name in columns])

            logger.info(f"CSV report generated: {filepath}")
            return str(filepath)

        except OSError as e:
            logger.error(f"Error generating CSV report: {e}")
            raise

    def _metadata(self) -> Dict[str, Any]:
        spec = self.result.spec
        return {
            'schema': SCHEMA_LINE.lstrip("# "),
            'axis': spec.axis.value,
            'detectors': [k.value for k in spec.detectors],
            'mc_trials': spec.mc_trials,
            'seed': spec.seed,
            'nu': self.nu,
            'variance_method': self.method.value if self.method else None,
            'base_scenario': spec.base_scenario.to_dict(),
        }

    def generate_json(self, include_timestamp: bool = False, pretty: bool = True) -> str:
        """
        Generate the JSON mirror of the sweep table.

        Args:
            include_timestamp: Include timestamp in filename
            pretty: Use pretty formatting (indentation)

        Returns:
            Path to generated JSON file
        """
        filepath = self._filepath(".json", include_timestamp)

        try:
            report_data = {
                'metadata': self._metadata(),
                'columns': self.result.columns,
                'rows': self.result.records(),
            }
            with open(filepath, 'w', encoding='utf-8') as f:
                json.dump(_json_safe(report_data), f, indent=2 if pretty else None, ensure_ascii=False)

            logger.info(f"JSON report generated: {filepath}")
            return str(filepath)

        except OSError as e:
            logger.error(f"Error generating JSON report: {e}")
            raise

    def generate_txt(self, include_timestamp: bool = False) -> str:
        """
        Generate human-readable TXT summary.

        Returns:
            Path to generated TXT file
        """
        filepath = self._filepath(".txt", include_timestamp)
        spec = self.result.spec

        try:
            lines = []
            lines.append("=" * 70)
            lines.append("  receptorlab - Sweep Report")
            lines.append("=" * 70)
            lines.append("")
            lines.append(f"Generated: {datetime.now().strftime('%Y-%m-%d %H:%M:%S')}")
            lines.append(f"Axis: {spec.axis.value} ({len(self.result.rows)} points)")
            lines.append(f"Monte Carlo trials per point: {spec.mc_trials:,}")
            lines.append(f"Seed: {spec.seed}")
            lines.append(f"Duration: {self.result.duration:.2f} seconds")
            lines.append("")

            lines.append("-" * 70)
            lines.append("  ANALYTIC BEP")
            lines.append("-" * 70)
            lines.append("")
            header = f"  {'value':>12}" + "".join(f"{k.value:>12}" for k in spec.detectors)
            lines.append(header)
            for row in self.result.rows:
                cells = "".join(f"{row.detectors[k].analytic_bep:>12.3e}" for k in spec.detectors)
                lines.append(f"  {row.axis_value:>12.4g}{cells}")
            lines.append("")

            if spec.mc_trials > 0:
                lines.append("-" * 70)
                lines.append("  MONTE CARLO BEP (95% CI)")
                lines.append("-" * 70)
                lines.append("")
                for row in self.result.rows:
                    cells = "  ".join(
                        f"{k.value}={row.detectors[k].mc_bep:.3e}±{row.detectors[k].mc_ci95:.1e}"
                        for k in spec.detectors
                    )
                    lines.append(f"  {row.axis_value:>12.4g}  {cells}")
                lines.append("")

            if self.result.cancelled:
                lines.append("  Status: CANCELLED")
            else:
                lines.append("  Status: SUCCESS")
            lines.append("")
            lines.append("=" * 70)
            lines.append("  End of Report")
            lines.append("=" * 70)

            with open(filepath, 'w', encoding='utf-8') as f:
                f.write('\n'.join(lines))

            logger.info(f"TXT report generated: {filepath}")
            return str(filepath)

        except OSError as e:
            logger.error(f"Error generating TXT report: {e}")
            raise

    def generate_all(self, include_timestamp: bool = False) -> dict:
        """Generate all report formats."""
        return {
            'csv': self.generate_csv(include_timestamp),
            'json': self.generate_json(include_timestamp),
            'txt': self.generate_txt(include_timestamp),
        }


# Utility functions for direct use

def read_sweep_csv(path: str) -> List[Dict[str, float]]:
    """Read a sweep table back; the schema line is checked and skipped."""
    with open(path, 'r', newline='', encoding='utf-8') as f:
        first = f.readline().rstrip("\n")
        if first != SCHEMA_LINE:
            raise ValueError(f"{path}: unknown schema line {first!r}")
        return [{k: float(v) for k, v in row.items()} for row in csv.DictReader(f)]


def write_histogram_csv(report, path: str) -> str:
    """
    One row per statistic and bin: edges, count, empirical and analytic density.
    """
    filepath = _with_suffix(path, ".csv")
    with open(filepath, 'w', newline='', encoding='utf-8') as f:
        f.write(HISTOGRAM_SCHEMA_LINE + "\n")
        writer = csv.writer(f)
        writer.writerow(['statistic', 'bit', 'bin_left', 'bin_right', 'count', 'density', 'analytic_density'])
        for kind, histogram in report.histograms.items():
            overlay = histogram.overlay()
            density = histogram.density
            for i, count in enumerate(histogram.counts):
                writer.writerow([
                    kind.value, report.bit,
                    _cell(float(histogram.edges[i])), _cell(float(histogram.edges[i + 1])),
                    int(count), _cell(float(density[i])), _cell(float(overlay[i])),
                ])
    logger.info(f"Histogram CSV generated: {filepath}")
    return str(filepath)


def write_json(data: Dict[str, Any], path: str) -> str:
    """Write a JSON summary next to ``path`` (suffix replaced by .json)."""
    filepath = _with_suffix(path, ".json")
    with open(filepath, 'w', encoding='utf-8') as f:
        json.dump(_json_safe(data), f, indent=2, ensure_ascii=False)
    logger.info(f"JSON report generated: {filepath}")
    return str(filepath)
