"""
Hyperbolic Model Module
Projective models of real and complex hyperbolic space with curvature pinched
in [-4, -1]: distances, geodesics, Busemann functions, Gromov products and the
curvature-operator eigensplit.

Points are homogeneous vectors for the Hermitian form
    <z, w> = sum_{i<=n} conj(z_i) w_i - conj(z_{n+1}) w_{n+1}
and cosh d(x, y) = |<X, Y>| on representatives with <X, X> = -1.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from geometry.geometry_errors import (
    CenterCollisionError,
    ConvergenceError,
    DegenerateGeodesicError,
    DomainError,
    ModelMismatchError,
    NormalizationError,
    PreconditionError,
    RepresentationError,
)

logger = logging.getLogger(__name__)

FIELDS = ("real", "complex")
PROJECTIVE_TOLERANCE = 1e-10
NULL_TOLERANCE = 1e-12
TANGENT_TOLERANCE = 1e-8
PAIRING_TOLERANCE = 1e-9
UNIT_TOLERANCE = 1e-8
LIMIT_SCHEDULE = (20.0, 25.0, 30.0, 35.0, 40.0)
LIMIT_MIN_EVALUATIONS = 3
LIMIT_STABILITY = 1e-8
GOLDEN_DELTA = 2.0 * math.log((1.0 + math.sqrt(5.0)) / 2.0)


def hermitian_form(z: np.ndarray, w: np.ndarray):
    """Signature (n,1) form, batched over leading axes."""
    z = np.asarray(z)
    w = np.asarray(w)
    return (np.sum(np.conj(z[..., :-1]) * w[..., :-1], axis=-1)
            - np.conj(z[..., -1]) * w[..., -1])


def _real_form(z: np.ndarray, w: np.ndarray) -> float:
    return float(np.real(hermitian_form(z, w)))


def _euclidean_sq(vec: np.ndarray) -> float:
    return float(np.real(np.vdot(vec, vec)))


@dataclass(frozen=True)
class ModelSpace:
    """
    Real or complex hyperbolic n-space in its projective model.

    Args:
        field: "real" or "complex"
        n: dimension parameter (n >= 2); vectors have n + 1 coordinates
    """
    field: str
    n: int

    def __post_init__(self):
        if self.field not in FIELDS:
            raise PreconditionError(f"Unknown field '{self.field}', expected one of {FIELDS}")
        if int(self.n) != self.n or self.n < 2:
            raise PreconditionError(f"Dimension parameter must be an integer >= 2, got {self.n}")

    @classmethod
    def from_name(cls, name: str) -> "ModelSpace":
        """Parse names such as 'real-h2', 'real-h3', 'complex-h2'."""
        try:
            field, dim = name.lower().split("-h")
            return cls(field, int(dim))
        except (ValueError, PreconditionError) as e:
            raise PreconditionError(f"Unrecognized model name '{name}'") from e

    @property
    def name(self) -> str:
        return f"{self.field}-h{self.n}"

    @property
    def is_complex(self) -> bool:
        return self.field == "complex"

    @property
    def dtype(self):
        return np.complex128 if self.is_complex else np.float64

    @property
    def dim(self) -> int:
        return self.n + 1

    @property
    def heisenberg_dim(self) -> int:
        return self.n - 1

    def signature(self) -> np.ndarray:
        return np.diag([1.0] * self.n + [-1.0]).astype(self.dtype)

    def form(self, z: np.ndarray, w: np.ndarray):
        value = hermitian_form(z, w)
        return complex(value) if self.is_complex else float(np.real(value))

    def origin(self) -> "ProjectivePoint":
        rep = np.zeros(self.dim, dtype=self.dtype)
        rep[-1] = 1.0
        return ProjectivePoint(self, rep)

    def point(self, rep) -> "ProjectivePoint":
        return ProjectivePoint(self, rep)

    def ideal(self, rep) -> "IdealPoint":
        return IdealPoint(self, rep)

    def random_unit_vector(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Uniform unit vector of K^size."""
        vec = rng.standard_normal(size)
        if self.is_complex:
            vec = vec + 1j * rng.standard_normal(size)
        return (vec / np.linalg.norm(vec)).astype(self.dtype)

    def random_point(self, rng: np.random.Generator, radius: float = 3.0) -> "ProjectivePoint":
        """Point at distance uniform in [0, radius] from the origin, uniform direction."""
        r = radius * rng.uniform(0.0, 1.0)
        u = self.random_unit_vector(rng, self.n)
        rep = np.concatenate([math.sinh(r) * u, np.array([math.cosh(r)], dtype=self.dtype)])
        return ProjectivePoint(self, rep)

    def random_ideal(self, rng: np.random.Generator) -> "IdealPoint":
        u = self.random_unit_vector(rng, self.n)
        return IdealPoint(self, np.concatenate([u, np.ones(1, dtype=self.dtype)]))

    def random_unit_tangent(self, rng: np.random.Generator, at: "ProjectivePoint") -> "TangentVector":
        X = at.rep
        vec = rng.standard_normal(self.dim).astype(self.dtype)
        if self.is_complex:
            vec = vec + 1j * rng.standard_normal(self.dim)
        vec = vec + hermitian_form(X, vec) * X
        return TangentVector(at, vec / math.sqrt(_real_form(vec, vec)))

    def _random_rotation(self, rng: np.random.Generator) -> np.ndarray:
        """Form-preserving map fixing the origin: unitary block plus a phase."""
        block = rng.standard_normal((self.n, self.n))
        if self.is_complex:
            block = block + 1j * rng.standard_normal((self.n, self.n))
        q, r = np.linalg.qr(block)
        diag = np.diag(r)
        q = q * (diag / np.abs(diag))
        rotation = np.eye(self.dim, dtype=self.dtype)
        rotation[:self.n, :self.n] = q
        if self.is_complex:
            rotation[-1, -1] = np.exp(1j * rng.uniform(0.0, 2.0 * math.pi))
        return rotation

    def random_isometry(self, rng: np.random.Generator, max_boost: float = 1.5) -> np.ndarray:
        """
        Random linear map preserving the form: rotation * boost * rotation.

        Returns:
            (n+1) x (n+1) matrix G with G^H J G = J
        """
        r = rng.uniform(0.0, max_boost)
        boost = np.eye(self.dim, dtype=self.dtype)
        boost[-2, -2] = boost[-1, -1] = math.cosh(r)
        boost[-2, -1] = boost[-1, -2] = math.sinh(r)
        return self._random_rotation(rng) @ boost @ self._random_rotation(rng)


def _coerce(model: ModelSpace, rep) -> np.ndarray:
    vec = np.array(rep, dtype=np.complex128 if np.iscomplexobj(rep) else np.float64)
    if vec.shape != (model.dim,):
        raise RepresentationError(f"Expected a vector of length {model.dim}, got shape {vec.shape}")
    if not model.is_complex:
        if np.iscomplexobj(vec):
            if np.max(np.abs(vec.imag)) > 1e-12 * max(1.0, np.max(np.abs(vec))):
                raise RepresentationError("Real model points must have real coordinates")
            vec = vec.real
    return vec.astype(model.dtype)


def _normalize_timelike(model: ModelSpace, vec: np.ndarray) -> np.ndarray:
    q = _real_form(vec, vec)
    scale = _euclidean_sq(vec)
    if abs(q + 1.0) > 1e-12 * scale:
        if q >= 0.0:
            raise RepresentationError(f"Vector is not timelike (<X,X> = {q:.3e})")
        vec = vec / math.sqrt(-q)
    last = vec[-1]
    if model.is_complex:
        vec = vec * (abs(last) / last)
        vec[-1] = abs(last)
    elif last < 0:
        vec = -vec
    return vec


def _normalize_null(model: ModelSpace, vec: np.ndarray) -> np.ndarray:
    largest = float(np.max(np.abs(vec)))
    if largest == 0.0 or abs(vec[-1]) <= 1e-14 * largest:
        raise RepresentationError("A null vector needs a nonzero last coordinate")
    vec = vec / vec[-1]
    q = _real_form(vec, vec)
    if abs(q) > NULL_TOLERANCE:
        raise RepresentationError(f"Vector is not null (<X,X> = {q:.3e})")
    spatial = vec[:-1] / math.sqrt(_euclidean_sq(vec[:-1]))
    return np.concatenate([spatial, np.ones(1, dtype=model.dtype)])


@dataclass(frozen=True, eq=False)
class ProjectivePoint:
    """Interior point; rep is stored with <rep, rep> = -1 and a real positive last coordinate."""
    model: ModelSpace
    rep: np.ndarray

    def __post_init__(self):
        vec = _normalize_timelike(self.model, _coerce(self.model, self.rep))
        vec.setflags(write=False)
        object.__setattr__(self, "rep", vec)


@dataclass(frozen=True, eq=False)
class IdealPoint:
    """Boundary point; rep is null with last coordinate 1 (ball-model boundary point (xi, 1))."""
    model: ModelSpace
    rep: np.ndarray

    def __post_init__(self):
        vec = _normalize_null(self.model, _coerce(self.model, self.rep))
        vec.setflags(write=False)
        object.__setattr__(self, "rep", vec)

    @property
    def boundary_coordinates(self) -> np.ndarray:
        """Unit vector xi of the ball-model boundary."""
        return np.array(self.rep[:-1])


Vertex = Union[ProjectivePoint, IdealPoint]


@dataclass(frozen=True, eq=False)
class TangentVector:
    """Tangent vector at a point: vec is complex-orthogonal to at.rep, metric Re<.,.>."""
    at: ProjectivePoint
    vec: np.ndarray

    def __post_init__(self):
        vec = _coerce(self.at.model, self.vec)
        pairing = abs(hermitian_form(self.at.rep, vec))
        bound = TANGENT_TOLERANCE * max(1.0, math.sqrt(_euclidean_sq(vec) * _euclidean_sq(self.at.rep)))
        if pairing > bound:
            raise NormalizationError(f"Vector is not tangent at its base point (|<X,V>| = {pairing:.3e})")
        vec.setflags(write=False)
        object.__setattr__(self, "vec", vec)

    @property
    def model(self) -> ModelSpace:
        return self.at.model

    @property
    def norm(self) -> float:
        return math.sqrt(max(_real_form(self.vec, self.vec), 0.0))

    def real_inner(self, other: "TangentVector") -> float:
        return _real_form(self.vec, other.vec)

    def scaled(self, factor: float) -> "TangentVector":
        return TangentVector(self.at, factor * self.vec)

    def unit(self) -> "TangentVector":
        norm = self.norm
        if norm == 0.0:
            raise NormalizationError("Cannot normalize the zero tangent vector")
        return self.scaled(1.0 / norm)


def _check_same_model(*items) -> ModelSpace:
    model = items[0].model
    for item in items[1:]:
        if item.model != model:
            raise ModelMismatchError(f"Model mismatch: {model.name} vs {item.model.name}")
    return model


def pair_modulus(a: np.ndarray, b: np.ndarray, aa: float, bb: float) -> float:
    """
    |<a, b>| from the difference of phase-aligned representatives.

    The phase error of the alignment only enters at second order, so the
    result keeps its relative accuracy when |<a, b>| is tiny compared to the
    entries of a and b.

    Args:
        a, b: homogeneous vectors
        aa, bb: known values of <a, a> and <b, b>

    Returns:
        |<a, b>|
    """
    g = hermitian_form(a, b)
    modulus = abs(g)
    if modulus == 0.0:
        return 0.0
    phase = -np.conj(g) / modulus
    delta = a - phase * b
    return max(0.5 * (_real_form(delta, delta) - aa - bb), 0.0)


def projectively_equal(a: Vertex, b: Vertex, tol: float = PROJECTIVE_TOLERANCE) -> bool:
    """Equality up to a unit scalar, via the wedge norm of Euclidean-normalized reps."""
    if type(a) is not type(b) or a.model != b.model:
        return False
    x = a.rep / math.sqrt(_euclidean_sq(a.rep))
    y = b.rep / math.sqrt(_euclidean_sq(b.rep))
    wedge = np.outer(x, y) - np.outer(y, x)
    return math.sqrt(0.5 * float(np.sum(np.abs(wedge) ** 2))) <= tol


def distance(x: ProjectivePoint, y: ProjectivePoint) -> float:
    """
    Hyperbolic distance, d = arccosh|<X, Y>|.

    Evaluated as 2 asinh(sqrt(<D, D>) / 2) with D = X - phase * Y so that
    small distances keep full relative precision.

    Raises:
        ModelMismatchError: points from different models
        RepresentationError: |<X, Y>| < 1 - tolerance
    """
    _check_same_model(x, y)
    X, Y = x.rep, y.rep
    g = hermitian_form(X, Y)
    modulus = abs(g)
    if modulus == 0.0:
        raise RepresentationError("Orthogonal representatives cannot both be interior points")
    D = X - (-np.conj(g) / modulus) * Y
    dd = _real_form(D, D)
    if dd < -2.0 * PAIRING_TOLERANCE:
        raise RepresentationError(f"|<X,Y>| < 1 (<D,D> = {dd:.3e})")
    return 2.0 * math.asinh(0.5 * math.sqrt(max(dd, 0.0)))


def chain_distances(reps: np.ndarray) -> np.ndarray:
    """Distances between consecutive rows of an array of <X, X> = -1 representatives."""
    g = hermitian_form(reps[:-1], reps[1:])
    phase = -np.conj(g) / np.abs(g)
    D = reps[:-1] - phase[:, None] * reps[1:]
    dd = np.real(hermitian_form(D, D))
    return 2.0 * np.arcsinh(0.5 * np.sqrt(np.maximum(dd, 0.0)))


def geodesic_ray(o: ProjectivePoint, u: TangentVector, t: float) -> ProjectivePoint:
    """
    Point exp_o(t u) = cosh(t) O + sinh(t) U.

    Args:
        o: base point
        u: unit tangent vector at o
        t: arc length (negative values follow the opposite ray)

    Raises:
        NormalizationError: u not unit or not tangent at o
    """
    _check_same_model(o, u.at)
    O, U = o.rep, u.vec
    if abs(_real_form(U, U) - 1.0) > UNIT_TOLERANCE:
        raise NormalizationError(f"Tangent vector is not unit (Re<U,U> = {_real_form(U, U):.12g})")
    if abs(hermitian_form(O, U)) > TANGENT_TOLERANCE * math.sqrt(_euclidean_sq(O)):
        raise NormalizationError("Tangent vector is not orthogonal to the base point")
    return ProjectivePoint(o.model, math.cosh(t) * O + math.sinh(t) * U)


def ray_endpoint(o: ProjectivePoint, u: TangentVector) -> IdealPoint:
    """Ideal endpoint O + U of the ray from o in direction u."""
    return IdealPoint(o.model, o.rep + u.unit().vec)


def unit_tangent_toward(x: ProjectivePoint, target: Vertex) -> TangentVector:
    """Unit tangent at x of the geodesic from x to target."""
    _check_same_model(x, target)
    if isinstance(target, IdealPoint):
        X, Xi = x.rep, target.rep
        return TangentVector(x, -Xi / hermitian_form(X, Xi) - X)
    return log_map(x, target).unit()


def log_map(x: ProjectivePoint, y: ProjectivePoint) -> TangentVector:
    """Tangent vector at x of length d(x, y) pointing at y."""
    d = distance(x, y)
    if d == 0.0:
        raise DegenerateGeodesicError("log_map of coincident points")
    X, Y = x.rep, y.rep
    g = hermitian_form(X, Y)
    aligned = (-np.conj(g) / abs(g)) * Y
    direction = (aligned - math.cosh(d) * X) / math.sinh(d)
    direction = direction + hermitian_form(X, direction) * X
    direction = direction / math.sqrt(_real_form(direction, direction))
    return TangentVector(x, d * direction)


def exp_map(v: TangentVector) -> ProjectivePoint:
    norm = v.norm
    if norm == 0.0:
        return v.at
    return geodesic_ray(v.at, v.scaled(1.0 / norm), norm)


def point_on_segment(x: ProjectivePoint, y: ProjectivePoint, s: float) -> ProjectivePoint:
    """
    Point at distance s from x on the segment xy (s may leave [0, d]).

    Uses both endpoints, P = (sinh(d - s) X + sinh(s) Y') / sinh(d), which
    stays well conditioned when the points are far from the origin.
    """
    d = distance(x, y)
    if d == 0.0:
        raise DegenerateGeodesicError("Segment endpoints coincide")
    X, Y = x.rep, y.rep
    g = hermitian_form(X, Y)
    aligned = (-np.conj(g) / abs(g)) * Y
    return ProjectivePoint(x.model, (math.sinh(d - s) * X + math.sinh(s) * aligned) / math.sinh(d))


@dataclass(frozen=True, eq=False)
class Geodesic:
    """
    Unit-speed geodesic gamma(t) = tail e^{-t} + head e^{t} from start to end.

    gamma(0) is the point of the geodesic closest to the model origin.
    """
    model: ModelSpace
    start: IdealPoint
    end: IdealPoint
    tail: np.ndarray
    head: np.ndarray

    def __call__(self, t: float) -> ProjectivePoint:
        return ProjectivePoint(self.model, math.exp(-t) * self.tail + math.exp(t) * self.head)

    def rescaled(self, t: float) -> Tuple[np.ndarray, float]:
        """e^{-t} gamma(t) and its self-pairing -e^{-2t}."""
        e2 = math.exp(-2.0 * t)
        return e2 * self.tail + self.head, -e2

    def velocity(self, t: float) -> TangentVector:
        return TangentVector(self(t), -math.exp(-t) * self.tail + math.exp(t) * self.head)


def geodesic_between_ideal(xi: IdealPoint, eta: IdealPoint) -> Geodesic:
    """
    Unit-speed geodesic with gamma(-inf) = xi, gamma(+inf) = eta.

    Args:
        xi, eta: distinct ideal points of one model

    Returns:
        Geodesic with gamma(t) = a (e^{-t} xi + e^{t} c eta), c = -|g|/g,
        a = 1/sqrt(2|g|), g = <xi, eta>

    Raises:
        DegenerateGeodesicError: xi = eta
    """
    model = _check_same_model(xi, eta)
    if projectively_equal(xi, eta):
        raise DegenerateGeodesicError("Geodesic endpoints coincide")
    g = hermitian_form(xi.rep, eta.rep)
    modulus = abs(g)
    c = -modulus / g
    a = 1.0 / math.sqrt(2.0 * modulus)
    return Geodesic(model, xi, eta, a * xi.rep, a * c * eta.rep)


@dataclass(frozen=True, eq=False)
class BusemannChart:
    """
    Busemann function centered at an ideal point, pinned to vanish at a basepoint.

    Args:
        center: ideal point omega
        basepoint: point o with b(o) = 0
    """
    center: IdealPoint
    basepoint: ProjectivePoint

    def __post_init__(self):
        _check_same_model(self.center, self.basepoint)

    @property
    def model(self) -> ModelSpace:
        return self.basepoint.model

    def toward_center(self, x: Optional[ProjectivePoint] = None) -> TangentVector:
        """Unit tangent at x (default: the basepoint) pointing at the center."""
        return unit_tangent_toward(self.basepoint if x is None else x, self.center)

    def shifted(self, c: float) -> "BusemannChart":
        """Chart with the same center whose function is b + c."""
        return BusemannChart(self.center, geodesic_ray(self.basepoint, self.toward_center(), c))


def busemann_value(chart: BusemannChart, x: ProjectivePoint) -> float:
    """
    b(x) = log(|<X, Omega>| / |<O, Omega>|).

    Raises:
        ModelMismatchError: x not in the chart's model
    """
    _check_same_model(chart.basepoint, x)
    Omega = chart.center.rep
    return math.log(abs(hermitian_form(x.rep, Omega)) / abs(hermitian_form(chart.basepoint.rep, Omega)))


def busemann_limit(chart: BusemannChart, x: ProjectivePoint, t: float) -> float:
    """
    The defining expression |x gamma(t)| - t along the ray from the basepoint
    to the center, evaluated on the rescaled ray point e^{-t} gamma(t).
    """
    _check_same_model(chart.basepoint, x)
    O = chart.basepoint.rep
    U = chart.toward_center().vec
    e2 = math.exp(-2.0 * t)
    ray_point = 0.5 * ((1.0 + e2) * O + (1.0 - e2) * U)
    m = pair_modulus(x.rep, ray_point, -1.0, -e2)
    c = math.exp(t) * m
    return math.log(2.0 * m) + math.log(0.5 * (1.0 + math.sqrt(max(0.0, 1.0 - 1.0 / c ** 2))))


def gradient_busemann(chart: BusemannChart, x: ProjectivePoint) -> TangentVector:
    """
    Unit gradient of b at x: X + Omega / <X, Omega>.

    Points away from the center along the geodesic from the center through x.
    """
    _check_same_model(chart.basepoint, x)
    X, Omega = x.rep, chart.center.rep
    return TangentVector(x, X + Omega / hermitian_form(X, Omega))


def gromov_product_point(x: ProjectivePoint, y: ProjectivePoint, o: ProjectivePoint) -> float:
    """(x|y)_o = (|xo| + |yo| - |xy|) / 2, clamped to [0, min(|ox|, |oy|)]."""
    dxo, dyo, dxy = distance(x, o), distance(y, o), distance(x, y)
    return min(max(0.5 * (dxo + dyo - dxy), 0.0), dxo, dyo)


def gromov_product_point_busemann(x: ProjectivePoint, y: ProjectivePoint, chart: BusemannChart) -> float:
    """(x|y)_b = (b(x) + b(y) - |xy|) / 2."""
    return 0.5 * (busemann_value(chart, x) + busemann_value(chart, y) - distance(x, y))


def _half_distance_correction(c: float) -> float:
    """-(1/2) log((1 + sqrt(1 - 1/c^2)) / 2), the gap between arccosh(c) and log(2c)."""
    c = max(c, 1.0)
    return -0.5 * math.log(0.5 * (1.0 + math.sqrt(max(0.0, 1.0 - 1.0 / c ** 2))))


def _aitken(values: Sequence[float]) -> float:
    x0, x1, x2 = values[-3:]
    d1, d2 = x1 - x0, x2 - x1
    denom = d2 - d1
    if d1 * d2 > 0.0 and abs(d2) < abs(d1) and denom != 0.0:
        return x2 - d2 * d2 / denom
    return x2


def _evaluate_limit(term, schedule: Sequence[float], stability: float, label: str) -> float:
    values = []
    for t in schedule:
        values.append(term(t))
        if values[-1] == math.inf:
            return math.inf
        if len(values) >= LIMIT_MIN_EVALUATIONS and abs(values[-1] - values[-2]) <= stability:
            return _aitken(values)
    logger.debug(f"{label} did not stabilize: {values}")
    raise ConvergenceError(f"{label} did not stabilize by t = {schedule[-1]}", last_values=values[-2:])


def gromov_product_ideal(xi: IdealPoint, eta: IdealPoint, o: ProjectivePoint,
                         schedule: Sequence[float] = LIMIT_SCHEDULE,
                         stability: float = LIMIT_STABILITY) -> float:
    """
    (xi|eta)_o as the limit of (x_t|y_t)_o along the rays from o.

    Args:
        xi, eta: ideal points
        o: base point
        schedule: ray parameters at which the limit is sampled
        stability: required agreement of successive samples

    Returns:
        the extrapolated limit, +inf when xi = eta

    Raises:
        ConvergenceError: no stabilization by the end of the schedule
    """
    _check_same_model(xi, eta, o)
    if projectively_equal(xi, eta):
        return math.inf
    O = o.rep
    U_xi = unit_tangent_toward(o, xi).vec
    U_eta = unit_tangent_toward(o, eta).vec

    def term(t: float) -> float:
        e2 = math.exp(-2.0 * t)
        a = 0.5 * ((1.0 + e2) * O + (1.0 - e2) * U_xi)
        b = 0.5 * ((1.0 + e2) * O + (1.0 - e2) * U_eta)
        g = pair_modulus(a, b, -e2, -e2)
        if g <= 0.0:
            return math.inf
        return -0.5 * math.log(2.0 * g) + _half_distance_correction(math.exp(2.0 * t) * g)

    return _evaluate_limit(term, schedule, stability, "Gromov product at a point")


def gromov_product_busemann(xi: IdealPoint, eta: IdealPoint, chart: BusemannChart,
                            schedule: Sequence[float] = LIMIT_SCHEDULE,
                            stability: float = LIMIT_STABILITY) -> float:
    """
    (xi|eta)_b as the limit of (x_s|y_s)_b for points at Busemann level s
    on the geodesics from the center to xi and to eta.

    Raises:
        CenterCollisionError: xi or eta is the chart center
        ConvergenceError: no stabilization by the end of the schedule
    """
    _check_same_model(xi, eta, chart.center)
    for p in (xi, eta):
        if projectively_equal(p, chart.center):
            raise CenterCollisionError("Busemann Gromov product of the chart center")
    if projectively_equal(xi, eta):
        return math.inf
    rays = [geodesic_between_ideal(chart.center, p) for p in (xi, eta)]
    offsets = [busemann_value(chart, ray(0.0)) for ray in rays]

    def term(s: float) -> float:
        taus = [s - b0 for b0 in offsets]
        (a, aa), (b, bb) = rays[0].rescaled(taus[0]), rays[1].rescaled(taus[1])
        g = pair_modulus(a, b, aa, bb)
        if g <= 0.0:
            return math.inf
        return (0.5 * sum(offsets) - 0.5 * math.log(2.0 * g)
                + _half_distance_correction(math.exp(sum(taus)) * g))

    return _evaluate_limit(term, schedule, stability, "Busemann Gromov product")


def gromov_product_ideal_closed(xi: IdealPoint, eta: IdealPoint, o: ProjectivePoint) -> float:
    """Closed form: e^{-2(xi|eta)_o} = |<xi,eta>| / (2 |<o,xi>| |<o,eta>|)."""
    _check_same_model(xi, eta, o)
    g = abs(hermitian_form(xi.rep, eta.rep))
    if g == 0.0:
        return math.inf
    O = o.rep
    return -0.5 * math.log(g / (2.0 * abs(hermitian_form(O, xi.rep)) * abs(hermitian_form(O, eta.rep))))


def gromov_product_busemann_closed(xi: IdealPoint, eta: IdealPoint, chart: BusemannChart) -> float:
    """Closed form: e^{-2(xi|eta)_b} = 2 |<o,w>|^2 |<xi,eta>| / (|<xi,w>| |<eta,w>|)."""
    _check_same_model(xi, eta, chart.center)
    W, O = chart.center.rep, chart.basepoint.rep
    g = abs(hermitian_form(xi.rep, eta.rep))
    if g == 0.0:
        return math.inf
    ratio = (2.0 * abs(hermitian_form(O, W)) ** 2 * g
             / (abs(hermitian_form(xi.rep, W)) * abs(hermitian_form(eta.rep, W))))
    return -0.5 * math.log(ratio)


def visual_distance(xi: IdealPoint, eta: IdealPoint, o: ProjectivePoint) -> float:
    """|xi eta|_o = exp(-(xi|eta)_o)."""
    return math.exp(-gromov_product_ideal(xi, eta, o))


def ptolemy_slack(x: IdealPoint, y: IdealPoint, u: IdealPoint, v: IdealPoint, o: ProjectivePoint,
                  closed: bool = False) -> float:
    """
    |xu||yv| + |xv||yu| - |xy||uv| for the visual function at o.

    The products are the limit evaluations, or the closed forms when closed is set.
    """
    product = gromov_product_ideal_closed if closed else gromov_product_ideal
    vd = lambda a, b: math.exp(-product(a, b, o))
    return vd(x, u) * vd(y, v) + vd(x, v) * vd(y, u) - vd(x, y) * vd(u, v)


def eigenspace_dimensions(model: ModelSpace) -> Tuple[int, int]:
    """Real dimensions of E_u(-1) and E_u(-4) inside u-perp."""
    if model.is_complex:
        return 2 * (model.n - 1), 1
    return model.n - 1, 0


def curvature_eigensplit(u: TangentVector, v: TangentVector) -> Tuple[TangentVector, TangentVector]:
    """
    Split v in u-perp into its E_u(-1) and E_u(-4) components.

    E_u(-4) is the real span of J u (J = multiplication by i); in the real
    model it is trivial and v2 = 0.

    Raises:
        PreconditionError: v not at u's point or not orthogonal to u
    """
    if not projectively_equal(u.at, v.at):
        raise PreconditionError("Eigensplit needs vectors at the same point")
    if abs(u.norm - 1.0) > UNIT_TOLERANCE:
        raise NormalizationError("Eigensplit direction must be a unit vector")
    overlap = u.real_inner(v)
    if abs(overlap) > TANGENT_TOLERANCE * max(1.0, v.norm):
        raise PreconditionError(f"v is not orthogonal to u (Re<u,v> = {overlap:.3e})")
    if not u.model.is_complex:
        return v, TangentVector(v.at, np.zeros_like(v.vec))
    v2 = np.imag(hermitian_form(u.vec, v.vec)) * (1j * u.vec)
    return TangentVector(v.at, v.vec - v2), TangentVector(v.at, v2)


def jacobi_scale(eigenvalue: float, t: float, kind: str) -> float:
    """
    Growth factor |V(t)| / |v| of a Jacobi field in an eigendirection.

    Args:
        eigenvalue: -1 or -4
        t: parameter (t >= 0 for spheres)
        kind: "sphere" (sinh(t k)/k) or "horosphere" (e^{t k}), k = sqrt|eigenvalue|

    Raises:
        DomainError: eigenvalue outside {-1, -4}, negative t on a sphere, unknown kind
    """
    if eigenvalue not in (-1, -4):
        raise DomainError(f"Curvature eigenvalue must be -1 or -4, got {eigenvalue}")
    k = math.sqrt(abs(eigenvalue))
    if kind == "sphere":
        if t < 0:
            raise DomainError("Sphere Jacobi scaling needs t >= 0")
        return math.sinh(t * k) / k
    if kind == "horosphere":
        return math.exp(t * k)
    raise DomainError(f"Unknown Jacobi field kind '{kind}'")


def is_delta_triple(a: float, b: float, c: float, delta: float) -> bool:
    """True iff the two smallest of a, b, c differ by at most delta."""
    lo, mid, _ = sorted((a, b, c))
    return lo == mid or mid - lo <= delta


def apply_isometry(g: np.ndarray, item):
    """Apply a form-preserving linear map to a point, ideal point or tangent vector."""
    if isinstance(item, TangentVector):
        raw = g @ item.at.rep
        moved = ProjectivePoint(item.model, raw)
        k = int(np.argmax(np.abs(raw)))
        return TangentVector(moved, (moved.rep[k] / raw[k]) * (g @ item.vec))
    return type(item)(item.model, g @ item.rep)
