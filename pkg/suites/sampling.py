"""
Sampling Module
Seeded sample streams and configuration samplers shared by the verification
suites, plus the per-check guard that turns solver failures into soft
failures.
"""

import logging
import math
import zlib
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Callable, Dict, List, Sequence, Tuple

import numpy as np

from geometry.geometry_errors import ConvergenceError
from geometry.heisenberg_group import HeisPoint, dilation, random_heis_point
from geometry.horo_correspondence import BoundaryChart
from geometry.hyperbolic_model import (
    GOLDEN_DELTA,
    BusemannChart,
    IdealPoint,
    ModelSpace,
    ProjectivePoint,
    TangentVector,
    ray_endpoint,
    unit_tangent_toward,
)
from loggers.report_logger import BoundCheckRecord

logger = logging.getLogger(__name__)

NEAR_DIAGONAL_EVERY = 4
NEAR_DIAGONAL_RANGE = (1e-3, 1e-1)


def suite_key(suite: str) -> int:
    """Stable integer for a suite name (independent of hash randomization)."""
    return zlib.crc32(suite.encode("utf-8"))


def sample_rng(seed: int, suite: str, index: int) -> np.random.Generator:
    """Generator for one sample; the stream depends only on (seed, suite, index)."""
    return np.random.default_rng(np.random.SeedSequence([seed & (2 ** 64 - 1), suite_key(suite), index]))


@dataclass(frozen=True)
class BoundConstants:
    """
    Constants of the bilipschitz comparisons, all derived from delta.

    c1 = 2 e^{-(1 + delta)}, c2 = sqrt(17 sinh delta),
    c3 = ln(sinh(2 + 3 delta) / 2), c2' = c2 e^{c3},
    c2'' = max(D e^{1 + delta}, c2') with D the measured boundary diameter.
    """
    delta: float
    c1: float
    c2: float
    c3: float
    c2_prime: float
    c2_doubleprime: float
    D: float = math.nan

    @classmethod
    def from_delta(cls, delta: float = GOLDEN_DELTA, D: float = math.nan) -> "BoundConstants":
        c1 = 2.0 * math.exp(-(1.0 + delta))
        c2 = math.sqrt(17.0 * math.sinh(delta))
        c3 = math.log(math.sinh(2.0 + 3.0 * delta) / 2.0)
        c2_prime = c2 * math.exp(c3)
        c2_doubleprime = c2_prime if math.isnan(D) else max(D * math.exp(1.0 + delta), c2_prime)
        return cls(delta, c1, c2, c3, c2_prime, c2_doubleprime, D)

    def integrity_error(self) -> float:
        """Largest difference from a fresh recomputation out of delta and D."""
        fresh = BoundConstants.from_delta(self.delta, self.D)
        return max(abs(getattr(self, name) - getattr(fresh, name))
                   for name in ("c1", "c2", "c3", "c2_prime", "c2_doubleprime"))

    def as_dict(self) -> Dict[str, float]:
        return {"delta": self.delta, "c1": self.c1, "c2": self.c2, "c3": self.c3,
                "c2_prime": self.c2_prime, "c2_doubleprime": self.c2_doubleprime, "D": self.D}


@dataclass
class SuiteContext:
    """Everything a sample evaluation needs; plain data so it can be shipped to worker processes."""
    model_name: str
    seed: int
    constants: BoundConstants
    tolerances: Dict[str, float]
    solvers: Dict[str, Any] = field(default_factory=dict)
    radii: Tuple[float, ...] = (1.0, 10.0)
    dilations: Tuple[float, ...] = (0.25, 1.0, 4.0)

    @cached_property
    def model(self) -> ModelSpace:
        return ModelSpace.from_name(self.model_name)

    @cached_property
    def boundary_chart(self) -> BoundaryChart:
        return BoundaryChart.standard(self.model)

    def rng(self, suite: str, index: int) -> np.random.Generator:
        return sample_rng(self.seed, suite, index)

    def tol(self, name: str) -> float:
        return self.tolerances[name]

    def resolutions(self, name: str) -> Tuple[int, ...]:
        """(M / 2, M) for a configured resolution M."""
        M = int(self.solvers[name])
        return (max(M // 2, 2), M)


def guarded(suite: str, check: str, index: int, compute: Callable[[], BoundCheckRecord],
            inputs: Dict[str, Any] = None) -> BoundCheckRecord:
    """Run one check; a ConvergenceError becomes a soft-failure record."""
    try:
        return compute()
    except ConvergenceError as e:
        logger.warning(f"{suite}/{check} sample {index}: solver did not converge ({e})")
        return BoundCheckRecord.soft(suite, check, index, e, inputs=inputs)


def encode_vertex(x) -> List:
    """Representative of a point or ideal point as plain numbers."""
    return np.asarray(x.rep).tolist()


def encode_heis(p: HeisPoint) -> Dict[str, Any]:
    return {"z": np.asarray(p.z).tolist(), "t": p.t}


def boundary_pair(context: SuiteContext, suite: str, index: int) -> Tuple[HeisPoint, HeisPoint, float]:
    """
    Heisenberg pair for dilation families: consecutive indices share a base
    pair (z uniform on a disk of radius R, t uniform on [-R^2, R^2]) and cycle
    through the dilation factors.

    Returns:
        (p, q, lambda)
    """
    model = context.model
    family, member = divmod(index, len(context.dilations))
    rng = context.rng(suite, family)
    radius = context.radii[family % len(context.radii)]
    p = random_heis_point(rng, model.heisenberg_dim, radius, model.is_complex)
    q = random_heis_point(rng, model.heisenberg_dim, radius, model.is_complex)
    lam = context.dilations[member]
    return dilation(lam, p), dilation(lam, q), lam


def perturbed_ideal(rng: np.random.Generator, o: ProjectivePoint, xi: IdealPoint, size: float) -> IdealPoint:
    """Endpoint of the ray from o whose direction is that of xi tilted by about size."""
    u = unit_tangent_toward(o, xi).vec
    noise = o.model.random_unit_tangent(rng, o).vec
    noise = noise - float(np.real(o.model.form(u, noise))) * u
    tilted = u + size * noise / max(math.sqrt(float(np.real(o.model.form(noise, noise)))), 1e-300)
    return ray_endpoint(o, TangentVector(o, tilted))


def ideal_pair(context: SuiteContext, suite: str, index: int) -> Tuple[IdealPoint, IdealPoint, bool]:
    """
    Two ideal points; every NEAR_DIAGONAL_EVERY-th sample is a near-diagonal
    pair (log-uniform tilt in NEAR_DIAGONAL_RANGE).

    Returns:
        (xi, eta, near_diagonal)
    """
    model = context.model
    rng = context.rng(suite, index)
    xi = model.random_ideal(rng)
    if index % NEAR_DIAGONAL_EVERY == NEAR_DIAGONAL_EVERY - 1:
        lo, hi = NEAR_DIAGONAL_RANGE
        size = math.exp(rng.uniform(math.log(lo), math.log(hi)))
        return xi, perturbed_ideal(rng, model.origin(), xi, size), True
    return xi, model.random_ideal(rng), False


def random_chart(model: ModelSpace, rng: np.random.Generator, radius: float = 2.0) -> BusemannChart:
    return BusemannChart(model.random_ideal(rng), model.random_point(rng, radius))


def triple_of(values: Sequence[float]) -> Tuple[float, float, float]:
    """The three values in increasing order."""
    lo, mid, hi = sorted(values)
    return lo, mid, hi
