"""
Verify Manager Module
Runs the verification suites: builds the run configuration, derives the
bound constants, evaluates samples (optionally on a process pool) and writes
the report.
"""

import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from itertools import repeat
from typing import Any, Callable, Dict, List, Sequence

import toml
from tqdm import tqdm

from geometry.geometry_errors import ConfigurationError, ConvergenceError
from geometry.horo_correspondence import VALIDATION_SAMPLES, spherical_distance
from geometry.hyperbolic_model import ModelSpace
from loggers.report_logger import BoundCheckRecord, ReportLogger
from suites.axiom_checks import chart_gate, check_axioms, equiradial_sample, integrity_sample
from suites.sampling import BoundConstants, SuiteContext, sample_rng
from suites.theorem_checks import (
    conformal_sample,
    identities_sample,
    lemmas_sample,
    thm1_sample,
    thm2_sample,
)

logger = logging.getLogger(__name__)

MODELS = ("real-h2", "real-h3", "complex-h2")
FORMATS = ("csv", "json")
CONSTANTS_TOLERANCE = 1e-12
DIAMETER_MARGIN = 1.05

SUITES: Dict[str, Callable[[SuiteContext, int], List[BoundCheckRecord]]] = {
    "thm1": thm1_sample,
    "thm2": thm2_sample,
    "lemmas": lemmas_sample,
    "axioms": check_axioms,
    "identities": identities_sample,
    "equiradial": equiradial_sample,
    "integrity": integrity_sample,
    "conformal": conformal_sample,
}
REAL_ONLY_SUITES = ("identities",)
# suites whose bounds use c2''
DIAMETER_SUITES = ("thm2",)
# suites that trust the boundary chart
CHART_SUITES = ("thm1", "axioms", "identities", "integrity", "conformal")

DEFAULT_TOLERANCES = {
    "identity": 1e-6,
    "optimizer": 1e-3,
    "busemann_limit": 1e-8,
    "chart": 1e-5,
    "solver_agreement": 1e-4,
    "ptolemy": 1e-9,
    "delta": 1e-4,
    "equiradial": 1e-6,
    "length_bound": 0.02,
    "fiber": 0.02,
}
DEFAULT_SOLVERS = {
    "cc_resolution": 128,
    "horo_resolution": 96,
    "sphere_resolution": 32,
    "ambient_resolution": 16,
    "diameter_samples": 10000,
    "diameter_resolution": 8,
}


def load_settings(path: str) -> Dict[str, Any]:
    """Load a TOML settings file"""
    try:
        with open(path, "r") as f:
            return toml.load(f)
    except FileNotFoundError as e:
        raise ConfigurationError(f"Config file not found: {path}") from e
    except toml.TomlDecodeError as e:
        raise ConfigurationError(f"Config file {path} is not valid TOML: {e}") from e


def parse_tolerance(text: str) -> Dict[str, float]:
    """Parse a 'name=value' tolerance override."""
    name, sep, value = text.partition("=")
    if not sep:
        raise ConfigurationError(f"Tolerance override '{text}' is not of the form name=value")
    try:
        return {name.strip(): float(value)}
    except ValueError as e:
        raise ConfigurationError(f"Tolerance '{name}' has a non-numeric value '{value}'") from e


@dataclass
class VerifyConfig:
    """
    One verification run.

    Args:
        model: real-h2, real-h3 or complex-h2
        suite: a suite name or "all"
        samples: samples per suite
        seed: master seed; sample i of suite s uses the stream (seed, s, i)
        output: report path
        format: csv or json
        tolerances: named tolerances (see DEFAULT_TOLERANCES)
        solvers: solver resolutions and diameter sampling (see DEFAULT_SOLVERS)
        radii, dilations: Heisenberg sampling for the horospherical suite
        workers: processes evaluating samples
        quiet: no progress bars
    """
    model: str = "complex-h2"
    suite: str = "thm1"
    samples: int = 100
    seed: int = 0
    output: str = "report.json"
    format: str = "json"
    tolerances: Dict[str, float] = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    solvers: Dict[str, int] = field(default_factory=lambda: dict(DEFAULT_SOLVERS))
    radii: Sequence[float] = (1.0, 10.0)
    dilations: Sequence[float] = (0.25, 1.0, 4.0)
    gate_samples: int = VALIDATION_SAMPLES
    workers: int = 1
    quiet: bool = False

    @classmethod
    def from_settings(cls, settings: Dict[str, Any]) -> "VerifyConfig":
        """Defaults overlaid with the [run], [tolerances], [solvers] and [sampling] tables."""
        config = cls()
        run = settings.get("run", {})
        unknown = set(run) - {"model", "suite", "samples", "seed", "output", "format", "workers", "gate_samples"}
        if unknown:
            raise ConfigurationError(f"Unknown [run] settings: {sorted(unknown)}")
        config = replace(config, **run)
        config = config.with_tolerances(settings.get("tolerances", {}))
        solvers = dict(config.solvers)
        for name, value in settings.get("solvers", {}).items():
            if name not in DEFAULT_SOLVERS:
                raise ConfigurationError(f"Unknown solver setting '{name}'")
            solvers[name] = value
        sampling = settings.get("sampling", {})
        return replace(config, solvers=solvers,
                       radii=tuple(sampling.get("radii", config.radii)),
                       dilations=tuple(sampling.get("dilations", config.dilations)))

    @classmethod
    def from_toml(cls, path: str) -> "VerifyConfig":
        return cls.from_settings(load_settings(path))

    def with_tolerances(self, overrides: Dict[str, float]) -> "VerifyConfig":
        tolerances = dict(self.tolerances)
        for name, value in overrides.items():
            if name not in DEFAULT_TOLERANCES:
                raise ConfigurationError(f"Unknown tolerance '{name}' (known: {', '.join(DEFAULT_TOLERANCES)})")
            tolerances[name] = float(value)
        return replace(self, tolerances=tolerances)

    def suite_names(self) -> List[str]:
        if self.suite != "all":
            return [self.suite]
        real = not ModelSpace.from_name(self.model).is_complex
        return [name for name in SUITES if real or name not in REAL_ONLY_SUITES]

    def validate(self) -> None:
        """
        Raises:
            ConfigurationError: any setting out of range
        """
        if self.model not in MODELS:
            raise ConfigurationError(f"Unknown model '{self.model}' (known: {', '.join(MODELS)})")
        if self.suite != "all" and self.suite not in SUITES:
            raise ConfigurationError(f"Unknown suite '{self.suite}' (known: {', '.join(SUITES)}, all)")
        if self.suite in REAL_ONLY_SUITES and ModelSpace.from_name(self.model).is_complex:
            raise ConfigurationError(f"Suite '{self.suite}' needs a real model")
        if self.format not in FORMATS:
            raise ConfigurationError(f"Unknown format '{self.format}' (known: {', '.join(FORMATS)})")
        if not isinstance(self.samples, int) or self.samples < 0:
            raise ConfigurationError(f"samples must be a nonnegative integer, got {self.samples!r}")
        if not isinstance(self.seed, int) or not 0 <= self.seed < 2 ** 64:
            raise ConfigurationError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")
        if not isinstance(self.workers, int) or self.workers < 1:
            raise ConfigurationError(f"workers must be a positive integer, got {self.workers!r}")
        if not isinstance(self.gate_samples, int) or self.gate_samples < 1:
            raise ConfigurationError(f"gate_samples must be a positive integer, got {self.gate_samples!r}")
        if any(not value >= 0.0 for value in self.tolerances.values()):
            raise ConfigurationError("Tolerances must be nonnegative numbers")
        if any(not isinstance(value, int) or value < 1 for value in self.solvers.values()):
            raise ConfigurationError("Solver settings must be positive integers")
        if not self.radii or any(r <= 0.0 for r in self.radii):
            raise ConfigurationError("Sampling radii must be positive")
        if not self.dilations or any(lam <= 0.0 for lam in self.dilations):
            raise ConfigurationError("Dilation factors must be positive")
        directory = os.path.dirname(os.path.abspath(self.output))
        if not os.path.isdir(directory) or not os.access(directory, os.W_OK):
            raise ConfigurationError(f"Output directory is not writable: {directory}")
        if os.path.isdir(self.output):
            raise ConfigurationError(f"Output path is a directory: {self.output}")
        if os.path.exists(self.output) and not os.access(self.output, os.W_OK):
            raise ConfigurationError(f"Output file is not writable: {self.output}")


@dataclass
class RunResult:
    """Outcome of a verification run."""
    summary: Dict[str, Any]
    header: Dict[str, Any]
    output: str

    @property
    def exit_code(self) -> int:
        return 1 if self.summary["hard_failures"] else 0


def measure_diameter(model: ModelSpace, samples: int, resolution: int, seed: int) -> float:
    """
    Largest sampled spherical distance d_inf between ideal points, times
    DIAMETER_MARGIN for the coarse solver. Pairs whose solver does not
    converge are skipped; NaN when none converged.
    """
    o = model.origin()
    rng = sample_rng(seed, "diameter", 0)
    largest, skipped = 0.0, 0
    for _ in range(samples):
        xi, eta = model.random_ideal(rng), model.random_ideal(rng)
        try:
            largest = max(largest, spherical_distance(o, xi, eta, (resolution,)))
        except ConvergenceError as e:
            skipped += 1
            logger.debug(f"Diameter pair skipped: {e}")
    if skipped:
        logger.warning(f"{skipped} of {samples} diameter pairs did not converge")
    if skipped == samples:
        return math.nan
    logger.info(f"Measured boundary diameter {largest:.6f} over {samples - skipped} pairs")
    return DIAMETER_MARGIN * largest


def evaluate_sample(context: SuiteContext, suite: str, index: int) -> List[BoundCheckRecord]:
    """Records of one sample; module level so worker processes can run it."""
    return SUITES[suite](context, index)


class VerifyManager:
    """
    Runs the configured suites and collects their records in a ReportLogger.
    """

    def __init__(self, config: VerifyConfig):
        """
        Args:
            config: run configuration (validated here)

        Raises:
            ConfigurationError: invalid configuration
        """
        config.validate()
        self.config = config
        self.model = ModelSpace.from_name(config.model)
        self.report = ReportLogger(config.output)
        self.constants = BoundConstants.from_delta()

    def _needs_diameter(self) -> bool:
        return self.config.samples > 0 and any(s in DIAMETER_SUITES for s in self.config.suite_names())

    def build_context(self) -> SuiteContext:
        """Suite context with the constants of this run (c2'' needs the measured diameter)."""
        config = self.config
        if self._needs_diameter():
            D = measure_diameter(self.model, config.solvers["diameter_samples"],
                                 config.solvers["diameter_resolution"], config.seed)
            self.constants = BoundConstants.from_delta(self.constants.delta, D)
        return SuiteContext(config.model, config.seed, self.constants, dict(config.tolerances),
                            dict(config.solvers), tuple(config.radii), tuple(config.dilations))

    def header(self) -> Dict[str, Any]:
        config = self.config
        return {
            "model": config.model,
            "suite": config.suite,
            "samples": config.samples,
            "seed": config.seed,
            "tolerances": config.tolerances,
            "solvers": config.solvers,
            "sampling": {"radii": list(config.radii), "dilations": list(config.dilations)},
            "constants": self.constants.as_dict(),
        }

    def _constants_record(self) -> BoundCheckRecord:
        error = self.constants.integrity_error()
        return BoundCheckRecord.measure("gate", "constants", 0, error, 0.0, 0.0, CONSTANTS_TOLERANCE,
                                        quantities=self.constants.as_dict())

    def run_suite(self, context: SuiteContext, suite: str) -> List[BoundCheckRecord]:
        """Evaluate every sample of one suite; records come back in sample order."""
        samples = self.config.samples
        logger.info(f"Running suite {suite} on {self.config.model} with {samples} samples")
        progress = dict(total=samples, desc=suite, disable=self.config.quiet)
        records: List[BoundCheckRecord] = []
        if self.config.workers > 1 and samples > 1:
            with ProcessPoolExecutor(max_workers=self.config.workers) as pool:
                results = pool.map(evaluate_sample, repeat(context), repeat(suite), range(samples))
                for batch in tqdm(results, **progress):
                    records.extend(batch)
        else:
            for index in tqdm(range(samples), **progress):
                records.extend(evaluate_sample(context, suite, index))
        self.report.log_records(records)
        hard = sum(r.hard_failure for r in records)
        soft = sum(r.soft_failure for r in records)
        logger.info(f"Suite {suite}: {len(records)} records, {hard} hard failures, {soft} soft failures")
        return records

    def run(self) -> RunResult:
        """
        Run all configured suites and export the report.

        Raises:
            ConfigurationError: invalid configuration
        """
        context = self.build_context()
        suites = self.config.suite_names()
        if self.config.samples > 0:
            self.report.log_record(self._constants_record())
            if any(s in CHART_SUITES for s in suites):
                self.report.log_records(chart_gate(context, self.config.gate_samples))
        for suite in suites:
            self.run_suite(context, suite)
        header = self.header()
        if self.config.format == "csv":
            self.report.export_to_csv(self.config.output, header)
        else:
            self.report.export_to_json(self.config.output, header)
        summary = self.report.get_stats()
        for key, entry in summary["checks"].items():
            logger.info(f"{key}: {entry['passed']}/{entry['samples']} passed, "
                        f"ratio range [{entry['min_ratio']:.6g}, {entry['max_ratio']:.6g}]")
        return RunResult(summary, header, self.config.output)


def run_suite(config: VerifyConfig) -> RunResult:
    """
    Run a verification configuration end to end.

    Returns:
        RunResult whose exit_code is 1 iff a converged sample violated a bound
    """
    return VerifyManager(config).run()
