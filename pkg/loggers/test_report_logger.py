"""
Tests for bound-check records and the report logger exports.
"""

import json
import math

import pandas as pd
import pytest

from geometry.geometry_errors import ConvergenceError
from loggers.report_logger import BoundCheckRecord, ReportLogger, within_bounds


def sample_records():
    return [
        BoundCheckRecord.measure("thm1", "horospherical_ratio", 1, 0.9, 0.2, 5.0, 1e-3,
                                 inputs={"p": {"z": [1 + 2j], "t": 0.5}}, quantities={"d_b": 0.4}),
        BoundCheckRecord.measure("thm1", "horospherical_ratio", 0, 6.0, 0.2, 5.0, 1e-3),
        BoundCheckRecord.soft("thm1", "horospherical_ratio", 2, ConvergenceError("stuck", residual=1e-3)),
    ]


class TestWithinBounds:

    @pytest.mark.parametrize("ratio, expected", [
        (1.0, True),
        (2.0005, True),
        (2.01, False),
        (0.4995, True),
        (math.nan, False),
    ])
    def test_tolerance_widens_the_interval(self, ratio, expected):
        assert within_bounds(ratio, 0.5, 2.0, 1e-3) is expected

    def test_infinite_upper_bound(self):
        assert within_bounds(1e300, 0.0, math.inf, 0.0)


class TestBoundCheckRecord:

    def test_measure_sets_passed(self):
        passed, failed, _ = sample_records()
        assert passed.passed and not passed.hard_failure
        assert not failed.passed and failed.hard_failure

    def test_soft_failure(self):
        record = sample_records()[2]
        assert record.soft_failure and not record.passed and not record.hard_failure
        assert math.isnan(record.ratio)
        assert record.diagnostics == {"error": "ConvergenceError", "message": "stuck", "residual": 1e-3}
        assert record.recompute_pass() is False

    def test_soft_failure_keeps_last_values(self):
        error = ConvergenceError("no limit", last_values=[0.25, 0.5])
        record = BoundCheckRecord.soft("axioms", "delta_ideal", 3, error)
        assert record.diagnostics["message"] == "no limit"
        assert record.diagnostics["last_values"] == [0.25, 0.5]
        assert "residual" not in record.diagnostics

    def test_pass_flag_is_recomputable(self):
        for record in sample_records()[:2]:
            assert record.recompute_pass() == record.passed

    def test_plain_dict_is_json_safe(self):
        record = sample_records()[0]
        document = json.loads(json.dumps(record.to_dict()))
        assert document["inputs"]["p"]["z"] == [[1.0, 2.0]]

    def test_non_finite_values_are_encoded(self):
        record = BoundCheckRecord.measure("lemmas", "gromov_gap", 0, 0.3, 0.0, math.inf, 0.0)
        assert record.to_dict()["upper"] == "inf"


class TestReportLogger:

    def test_records_are_sorted(self):
        report = ReportLogger()
        report.log_records(sample_records())
        assert [r.index for r in report.records()] == [0, 1, 2]

    def test_stats(self):
        report = ReportLogger()
        report.log_records(sample_records())
        stats = report.get_stats()
        assert stats["total_records"] == 3
        assert stats["hard_failures"] == 1
        assert stats["soft_failures"] == 1
        entry = stats["checks"]["thm1/horospherical_ratio"]
        assert entry["passed"] == 1
        assert entry["min_ratio"] == 0.9 and entry["max_ratio"] == 6.0

    def test_empty_stats(self):
        assert ReportLogger().get_stats() == {"total_records": 0, "hard_failures": 0, "soft_failures": 0,
                                              "checks": {}}

    def test_json_export(self, tmp_path):
        path = tmp_path / "report.json"
        report = ReportLogger(str(path))
        report.log_records(sample_records())
        report.export_to_json(str(path), {"seed": 1})
        document = json.loads(path.read_text())
        assert document["header"] == {"seed": 1}
        assert len(document["records"]) == 3
        assert document["records"][2]["ratio"] == "nan"
        assert document["summary"]["hard_failures"] == 1

    def test_csv_export(self, tmp_path):
        path = tmp_path / "report.csv"
        report = ReportLogger(str(path))
        report.log_records(sample_records())
        report.export_to_csv(str(path), {"seed": 1})
        frame = pd.read_csv(path)
        assert list(frame["index"]) == [0, 1, 2]
        assert list(frame["passed"]) == [False, True, False]
        assert json.loads(frame["quantities"][1]) == {"d_b": 0.4}
        sidecar = json.loads((tmp_path / "report.csv.summary.json").read_text())
        assert sidecar["summary"]["soft_failures"] == 1

    def test_exports_are_deterministic(self, tmp_path):
        texts = []
        for name, records in (("a.json", sample_records()), ("b.json", sample_records()[::-1])):
            report = ReportLogger()
            report.log_records(records)
            report.export_to_json(str(tmp_path / name), {"seed": 0})
            texts.append((tmp_path / name).read_text())
        assert texts[0] == texts[1]
