"""Tests fonctionnels du générateur de rapports (CSV, JSON, TXT)."""
import json
import math
import sys
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parents[2]
sys.path.insert(0, str(ROOT))
sys.path.insert(0, str(ROOT / "src"))

from src.config.sim_config import Axis, SweepSpec  # noqa: E402
from src.core.detection.detectors import StatisticKind  # noqa: E402
from src.core.detection.estimators import VarianceMethod  # noqa: E402
from src.core.experiments.sweep import run_sweep  # noqa: E402
from src.reports.sweep_reporter import (  # noqa: E402
    SCHEMA_LINE,
    SweepReporter,
    read_sweep_csv,
    write_json,
)

KINDS = [StatisticKind.BOUND_COUNT, StatisticKind.TOTAL_CONC]


@pytest.fixture
def sweep_result(reference_scenario):
    return run_sweep(SweepSpec(reference_scenario, Axis.INTERFERER_CONC, [1.0, 2.0, 4.0], KINDS))


def test_csv_schema_and_header(sweep_result, tmp_path):
    reporter = SweepReporter(sweep_result, output_dir=str(tmp_path), base_filename="interf")
    path = Path(reporter.generate_csv())
    assert path == tmp_path / "interf.csv"
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == SCHEMA_LINE
    assert lines[1].split(",") == sweep_result.columns
    assert len(lines) == 2 + 3


def test_csv_is_deterministic(sweep_result, tmp_path):
    first = SweepReporter(sweep_result, output_dir=str(tmp_path / "a")).generate_csv()
    second = SweepReporter(sweep_result, output_dir=str(tmp_path / "b")).generate_csv()
    assert Path(first).read_bytes() == Path(second).read_bytes()


def test_csv_values_read_back_exactly(sweep_result, tmp_path):
    path = SweepReporter.for_path(sweep_result, str(tmp_path / "out.csv")).generate_csv()
    rows = read_sweep_csv(path)
    for read, record in zip(rows, sweep_result.records()):
        for name, value in record.items():
            if math.isnan(value):
                assert math.isnan(read[name])
            else:
                assert read[name] == value


def test_read_rejects_unknown_schema(tmp_path):
    path = tmp_path / "other.csv"
    path.write_text("axis_value,DRUT_analytic_bep\n1.0,0.1\n", encoding="utf-8")
    with pytest.raises(ValueError):
        read_sweep_csv(str(path))


def test_json_mirror(sweep_result, tmp_path):
    reporter = SweepReporter(sweep_result, output_dir=str(tmp_path), nu=3.0, method=VarianceMethod.EXACT)
    data = json.loads(Path(reporter.generate_json()).read_text(encoding="utf-8"))
    assert data['metadata']['axis'] == 'interferer'
    assert data['metadata']['detectors'] == ['DNBR', 'DRUT']
    assert data['metadata']['variance_method'] == 'exact'
    assert len(data['rows']) == 3
    # pas de Monte Carlo : NaN devient null
    assert data['rows'][0]['DRUT_mc_bep'] is None


def test_txt_and_generate_all(sweep_result, tmp_path):
    files = SweepReporter(sweep_result, output_dir=str(tmp_path)).generate_all()
    assert set(files) == {'csv', 'json', 'txt'}
    text = Path(files['txt']).read_text(encoding="utf-8")
    assert "ANALYTIC BEP" in text
    assert "MONTE CARLO" not in text
    assert "Status: SUCCESS" in text


def test_timestamped_filenames(sweep_result, tmp_path):
    path = SweepReporter(sweep_result, output_dir=str(tmp_path)).generate_csv(include_timestamp=True)
    assert Path(path).name.startswith("sweep_")
    assert Path(path).name != "sweep.csv"


def test_write_json_replaces_suffix(tmp_path):
    path = write_json({'value': float('inf'), 'items': [1.0, float('nan')]}, str(tmp_path / "deep" / "run.csv"))
    assert path == str(tmp_path / "deep" / "run.json")
    assert json.loads(Path(path).read_text(encoding="utf-8")) == {'value': None, 'items': [1.0, None]}
