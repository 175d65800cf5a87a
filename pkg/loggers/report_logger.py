"""
Report Logger Module
Collects bound-check records from verification suites and exports them as
CSV or JSON reports with a summary.
"""

import json
import logging
import math
import threading
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional

import pandas as pd

logger = logging.getLogger(__name__)

CSV_COLUMNS = ["suite", "check", "index", "inputs", "quantities", "ratio", "lower", "upper",
               "tolerance", "passed", "soft_failure", "diagnostics"]


def within_bounds(ratio: float, lower: float, upper: float, tolerance: float) -> bool:
    """lower - tolerance <= ratio <= upper + tolerance; NaN never passes."""
    if ratio is None or math.isnan(ratio):
        return False
    return lower - tolerance <= ratio <= upper + tolerance


def _plain(value: Any) -> Any:
    """
    JSON-safe copy: numpy values become Python ones, complex numbers become
    [re, im] pairs and non-finite floats become strings.
    """
    if hasattr(value, "tolist"):
        value = value.tolist()
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, complex):
        return [_plain(value.real), _plain(value.imag)]
    if isinstance(value, float) and not math.isfinite(value):
        return "nan" if math.isnan(value) else ("inf" if value > 0 else "-inf")
    return value


def _encode(value: Dict[str, Any]) -> str:
    return json.dumps(_plain(value), sort_keys=True)


@dataclass
class BoundCheckRecord:
    """
    One sampled configuration with its computed quantities and bound check.

    passed is always within_bounds(ratio, lower, upper, tolerance) for
    converged samples; soft failures carry ratio NaN and passed False.
    """
    suite: str
    check: str
    index: int
    ratio: float
    lower: float
    upper: float
    tolerance: float
    passed: bool
    inputs: Dict[str, Any] = field(default_factory=dict)
    quantities: Dict[str, float] = field(default_factory=dict)
    soft_failure: bool = False
    diagnostics: Dict[str, Any] = field(default_factory=dict)

    @classmethod
    def measure(cls, suite: str, check: str, index: int, ratio: float, lower: float, upper: float,
                tolerance: float, inputs: Optional[Dict[str, Any]] = None,
                quantities: Optional[Dict[str, float]] = None,
                diagnostics: Optional[Dict[str, Any]] = None) -> "BoundCheckRecord":
        ratio = float(ratio)
        return cls(suite, check, index, ratio, float(lower), float(upper), float(tolerance),
                   within_bounds(ratio, lower, upper, tolerance), inputs or {}, quantities or {},
                   False, diagnostics or {})

    @classmethod
    def soft(cls, suite: str, check: str, index: int, error: Exception, lower: float = -math.inf,
             upper: float = math.inf, tolerance: float = 0.0,
             inputs: Optional[Dict[str, Any]] = None) -> "BoundCheckRecord":
        """Record for a sample whose solver did not converge."""
        diagnostics = {"error": type(error).__name__, "message": getattr(error, "message", str(error))}
        residual = getattr(error, "residual", None)
        if residual is not None:
            diagnostics["residual"] = residual
        if getattr(error, "last_values", ()):
            diagnostics["last_values"] = list(error.last_values)
        return cls(suite, check, index, math.nan, float(lower), float(upper), float(tolerance), False,
                   inputs or {}, {}, True, diagnostics)

    def recompute_pass(self) -> bool:
        if self.soft_failure:
            return False
        return within_bounds(self.ratio, self.lower, self.upper, self.tolerance)

    @property
    def hard_failure(self) -> bool:
        return not self.passed and not self.soft_failure

    def to_dict(self) -> Dict[str, Any]:
        return _plain(asdict(self))

    def to_row(self) -> Dict[str, Any]:
        row = asdict(self)
        for key in ("inputs", "quantities", "diagnostics"):
            row[key] = _encode(row[key])
        return row


class ReportLogger:
    """
    In-memory collector for BoundCheckRecords - thread-safe.

    Records are exported sorted by suite and sample index, so the report does
    not depend on the order in which samples finished.
    """

    def __init__(self, output_path: Optional[str] = None):
        self.output_path = output_path
        self._records: List[BoundCheckRecord] = []
        self._lock = threading.Lock()
        logger.info(f"Initialized report logger for path: {output_path}")

    def log_record(self, record: BoundCheckRecord) -> bool:
        """Log a single record"""
        with self._lock:
            self._records.append(record)
        if record.hard_failure:
            logger.warning(f"Hard failure in {record.suite}/{record.check} sample {record.index}: "
                           f"ratio {record.ratio:.6g} outside [{record.lower:.6g}, {record.upper:.6g}]")
        return True

    def log_records(self, records: List[BoundCheckRecord]) -> bool:
        for record in records:
            self.log_record(record)
        return True

    def records(self) -> List[BoundCheckRecord]:
        with self._lock:
            return sorted(self._records, key=lambda r: (r.suite, r.index))

    def get_stats(self) -> Dict[str, Any]:
        """
        Summary counts per suite/check: passed, hard and soft failures and the
        extremal ratios among converged samples.
        """
        checks: Dict[str, Dict[str, Any]] = {}
        for record in self.records():
            key = f"{record.suite}/{record.check}"
            entry = checks.setdefault(key, {"samples": 0, "passed": 0, "hard_failures": 0, "soft_failures": 0,
                                            "min_ratio": math.inf, "max_ratio": -math.inf})
            entry["samples"] += 1
            entry["passed"] += int(record.passed)
            entry["hard_failures"] += int(record.hard_failure)
            entry["soft_failures"] += int(record.soft_failure)
            if not record.soft_failure and math.isfinite(record.ratio):
                entry["min_ratio"] = min(entry["min_ratio"], record.ratio)
                entry["max_ratio"] = max(entry["max_ratio"], record.ratio)
        return {
            "total_records": sum(c["samples"] for c in checks.values()),
            "hard_failures": sum(c["hard_failures"] for c in checks.values()),
            "soft_failures": sum(c["soft_failures"] for c in checks.values()),
            "checks": checks,
        }

    def export_to_csv(self, output_path: str, header: Optional[Dict[str, Any]] = None) -> bool:
        """
        Export records to CSV (17 significant digits); the summary goes to a
        JSON sidecar next to it.
        """
        frame = pd.DataFrame([r.to_row() for r in self.records()], columns=CSV_COLUMNS)
        frame.to_csv(output_path, index=False, float_format="%.17g")
        with open(f"{output_path}.summary.json", "w") as f:
            f.write(json.dumps(_plain({"header": header or {}, "summary": self.get_stats()}),
                               sort_keys=True, indent=2))
            f.write("\n")
        logger.info(f"Exported {len(frame)} records to {output_path}")
        return True

    def export_to_json(self, output_path: str, header: Optional[Dict[str, Any]] = None) -> bool:
        """Export records and summary as one JSON document."""
        document = {
            "header": header or {},
            "records": [r.to_dict() for r in self.records()],
            "summary": self.get_stats(),
        }
        with open(output_path, "w") as f:
            f.write(json.dumps(_plain(document), sort_keys=True, indent=2))
            f.write("\n")
        logger.info(f"Exported {len(document['records'])} records to {output_path}")
        return True
