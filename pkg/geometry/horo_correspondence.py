"""
Horospherical Correspondence Module
Identifications between the Heisenberg group, the horosphere H = b^-1(0) of a
Busemann chart, the boundary minus the chart center and the unit tangent
sphere at the basepoint.

Built on them: the horospherical distance d_b (Heisenberg or ambient
solver), the spherical distance d_inf, radial projections, level curves and
the map f = rho_o o r_{b,0} from H to the unit tangent sphere.

In the standard chart (basepoint e_{n+1}, center e_n + e_{n+1}) the
horosphere is parametrized by
    embed(z, t) = (z, h, 1 + h),  h = (|z|^2 + 2 i t) / 2,
and the boundary by ideal(z, t) = (2 z, A - 1, A + 1), A = |z|^2 + 2 i t.
Every other chart is the image of this one under a frame of the form sending
(e_{n+1}, e_n) to (o, unit tangent at o toward the center).
"""

import logging
import math
from dataclasses import dataclass, field, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq

from geometry.contact_sphere import SPHERE_RESOLUTIONS, sphere_cc_distance
from geometry.geometry_errors import (
    BracketError,
    CenterCollisionError,
    DegenerateGeodesicError,
    DimensionMismatchError,
    PreconditionError,
)
from geometry.heisenberg_group import (
    RIEMANNIAN_RESOLUTIONS,
    HeisPoint,
    HorizontalPath,
    _im_inner,
    _pack,
    _unpack,
    augmented_lagrangian,
    cc_distance,
    cc_geodesic,
    exp_algebra,
    group_mul,
    horizontal_length,
    inverse,
    koranyi_gauge,
    random_heis_point,
    richardson,
    riemannian_distance,
)
from geometry.hyperbolic_model import (
    BusemannChart,
    IdealPoint,
    ModelSpace,
    ProjectivePoint,
    TangentVector,
    Vertex,
    busemann_value,
    chain_distances,
    distance,
    geodesic_between_ideal,
    gradient_busemann,
    hermitian_form,
    log_map,
    projectively_equal,
    ray_endpoint,
    unit_tangent_toward,
)

logger = logging.getLogger(__name__)

LEVEL_TOLERANCE = 1e-8
ISOMETRY_TOLERANCE = 1e-5
RADIAL_TOLERANCE = 1e-6
HOROSPHERE_TOLERANCE = 1e-6
DIFFERENCE_STEP = 1e-4
VALIDATION_SAMPLES = 200
AMBIENT_STEP = 0.05
AMBIENT_RESOLUTIONS = (16, 32)
AMBIENT_CONSTRAINT_TOLERANCE = 1e-8


def _standard_embedding(z: np.ndarray, t: np.ndarray, level: float = 0.0) -> np.ndarray:
    """
    Standard-chart representatives of (z, t) at Busemann level `level`,
    batched over leading axes of z (shape (..., n - 1)) and t (shape (...)).

    The level-s point is e^s (embed(z, t) + beta Omega) with
    beta = (e^{-2s} - 1) / 2, which keeps <X, X> = -1.
    """
    z = np.asarray(z)
    t = np.asarray(t, dtype=np.float64)
    beta = 0.5 * (math.exp(-2.0 * level) - 1.0)
    h = 0.5 * np.sum(np.abs(z) ** 2, axis=-1) + beta
    if np.iscomplexobj(z):
        h = h + 1j * t
    tail = np.stack([h, 1.0 + h], axis=-1)
    return math.exp(level) * np.concatenate([z, tail.astype(z.dtype)], axis=-1)


def _standard_ideal(z: np.ndarray, t: float) -> np.ndarray:
    A = float(np.real(np.vdot(z, z)))
    A = A + 2j * t if np.iscomplexobj(z) else A
    return np.concatenate([2.0 * z, np.array([A - 1.0, A + 1.0], dtype=z.dtype)])


def completed_frame(model: ModelSpace, anchors: Sequence[np.ndarray]) -> np.ndarray:
    """
    Form-orthonormal frame whose last columns are the given anchors.

    The anchors must be form-orthonormal with the timelike one last. The
    remaining columns come from Gram-Schmidt on the coordinate vectors,
    taking at each round the candidate with the largest remaining norm.
    """
    fixed = [np.asarray(a, dtype=model.dtype) for a in anchors]
    columns: List[np.ndarray] = []
    candidates = list(np.eye(model.dim, dtype=model.dtype))
    while len(columns) + len(fixed) < model.dim:
        best, best_norm = None, 0.0
        for e in candidates:
            v = e.copy()
            for _ in range(2):
                for f in fixed + columns:
                    v = v - (model.form(f, v) / float(np.real(model.form(f, f)))) * f
            q = float(np.real(model.form(v, v)))
            if q > best_norm:
                best, best_norm = v, q
        columns.append(best / math.sqrt(best_norm))
    return np.column_stack(columns + fixed)


def frame_inverse(model: ModelSpace, frame: np.ndarray) -> np.ndarray:
    """G^-1 = J G^H J for a form-preserving G."""
    J = model.signature()
    return J @ frame.conj().T @ J


@dataclass
class ChartValidation:
    """Worst errors observed while validating a chart on sampled points."""
    samples: int
    level_error: float
    invariance_error: float
    isometry_error: float
    radial_error: float = 0.0

    def passed(self, level_tol: float = LEVEL_TOLERANCE, isometry_tol: float = ISOMETRY_TOLERANCE,
               radial_tol: float = RADIAL_TOLERANCE) -> bool:
        return (self.level_error <= level_tol and self.invariance_error <= isometry_tol
                and self.isometry_error <= isometry_tol and self.radial_error <= radial_tol)


@dataclass(frozen=True, eq=False)
class HoroChart:
    """
    Identification of the Heisenberg group with the horosphere b^-1(0) of a
    Busemann chart; the identity goes to the basepoint.

    Args:
        chart: Busemann chart (center omega, basepoint o)
    """
    chart: BusemannChart
    frame: np.ndarray = field(init=False, repr=False)
    frame_inv: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        model = self.chart.model
        frame = completed_frame(model, [self.chart.toward_center().vec, self.chart.basepoint.rep])
        inv = frame_inverse(model, frame)
        frame.setflags(write=False)
        inv.setflags(write=False)
        object.__setattr__(self, "frame", frame)
        object.__setattr__(self, "frame_inv", inv)

    @classmethod
    def standard(cls, model: ModelSpace) -> "HoroChart":
        center = np.zeros(model.dim, dtype=model.dtype)
        center[-2:] = 1.0
        return cls(BusemannChart(IdealPoint(model, center), model.origin()))

    @property
    def model(self) -> ModelSpace:
        return self.chart.model

    @property
    def basepoint(self) -> ProjectivePoint:
        return self.chart.basepoint

    @property
    def center(self) -> IdealPoint:
        return self.chart.center

    def identity(self) -> HeisPoint:
        return HeisPoint.identity(self.model.heisenberg_dim, self.model.is_complex)

    def _coordinates(self, p: HeisPoint) -> np.ndarray:
        if p.dim != self.model.heisenberg_dim:
            raise DimensionMismatchError(
                f"{self.model.name} horospheres need {self.model.heisenberg_dim} E1 coordinates, got {p.dim}")
        if self.model.is_complex:
            return p.z.astype(np.complex128)
        if p.t != 0.0 or (p.is_complex and np.any(p.z.imag != 0.0)):
            raise PreconditionError("Real horospheres carry real z and t = 0")
        return np.real(p.z)

    def embed(self, p: HeisPoint) -> ProjectivePoint:
        """Point of H with Heisenberg coordinates p."""
        return self.embed_at_level(p, 0.0)

    def embed_at_level(self, p: HeisPoint, level: float) -> ProjectivePoint:
        """Point at Busemann level `level` on the geodesic from the center through embed(p)."""
        z = self._coordinates(p)
        return ProjectivePoint(self.model, self.frame @ _standard_embedding(z, np.float64(p.t), level))

    def embed_path(self, path: HorizontalPath, level: float = 0.0) -> np.ndarray:
        """Representatives of all samples of a path at one level, shape (M + 1, n + 1)."""
        z = path.z if self.model.is_complex else np.real(path.z)
        return _standard_embedding(z.astype(self.model.dtype), path.t, level) @ self.frame.T

    def ideal(self, p: HeisPoint) -> IdealPoint:
        """Endpoint of the geodesic from the center through embed(p)."""
        return IdealPoint(self.model, self.frame @ _standard_ideal(self._coordinates(p), p.t))

    def _heis_from(self, Y: np.ndarray) -> HeisPoint:
        z = Y[:-2]
        if not self.model.is_complex:
            return HeisPoint(np.real(z), 0.0)
        return HeisPoint(z, float(np.imag(Y[-2])))

    def inverse(self, x: ProjectivePoint) -> HeisPoint:
        """
        Heisenberg coordinates of the point of H on the geodesic from the
        center through x (x itself when x lies on H).
        """
        Y = self.frame_inv @ x.rep
        lam = Y[-1] - Y[-2]
        if abs(lam) == 0.0:
            raise CenterCollisionError("Point has no horospherical coordinates")
        return self._heis_from(Y / lam)

    def preimage(self, xi: IdealPoint) -> HeisPoint:
        """
        Heisenberg coordinates of an ideal point.

        Raises:
            CenterCollisionError: xi is the chart center
        """
        if projectively_equal(xi, self.center):
            raise CenterCollisionError("The chart center has no Heisenberg coordinates")
        Y = self.frame_inv @ xi.rep
        lam = Y[-1] - Y[-2]
        if abs(lam) <= 1e-14 * float(np.max(np.abs(Y))):
            raise CenterCollisionError("Ideal point too close to the chart center")
        Y = 2.0 * Y / lam
        p = self._heis_from(Y)
        return HeisPoint(0.5 * p.z, 0.5 * p.t)

    def validate(self, rng: np.random.Generator, samples: int = VALIDATION_SAMPLES,
                 radius: float = 2.0, step: float = DIFFERENCE_STEP) -> ChartValidation:
        """
        Check the chart on sampled points and directions: embedded points lie
        on b = 0, ambient distances are invariant under left translation, and
        finite-difference speeds of p exp(s v) match the Heisenberg norm of v.
        """
        dim, complex_valued = self.model.heisenberg_dim, self.model.is_complex
        level_error = invariance_error = isometry_error = 0.0
        for _ in range(samples):
            p = random_heis_point(rng, dim, radius, complex_valued)
            q = random_heis_point(rng, dim, radius, complex_valued)
            g = random_heis_point(rng, dim, radius, complex_valued)
            x = self.embed(p)
            level_error = max(level_error, abs(busemann_value(self.chart, x)))
            d = distance(x, self.embed(q))
            moved = distance(self.embed(g * p), self.embed(g * q))
            invariance_error = max(invariance_error, abs(moved - d) / max(1.0, d))
            v = random_heis_point(rng, dim, 1.0, complex_valued)
            norm = math.sqrt(float(np.real(np.vdot(v.z, v.z))) + v.t ** 2)
            if norm == 0.0:
                continue
            forward = p * HeisPoint(step * v.z / norm, step * v.t / norm)
            backward = p * HeisPoint(-step * v.z / norm, -step * v.t / norm)
            speed = distance(self.embed(backward), self.embed(forward)) / (2.0 * step)
            isometry_error = max(isometry_error, abs(speed - 1.0))
        logger.debug(f"chart validation: level {level_error:.2e}, invariance {invariance_error:.2e}, "
                     f"isometry {isometry_error:.2e}")
        return ChartValidation(samples, level_error, invariance_error, isometry_error)


@dataclass(frozen=True, eq=False)
class BoundaryChart:
    """Identification of the Heisenberg group with the boundary minus the chart center."""
    horo: HoroChart

    @classmethod
    def from_chart(cls, chart: BusemannChart) -> "BoundaryChart":
        return cls(HoroChart(chart))

    @classmethod
    def standard(cls, model: ModelSpace) -> "BoundaryChart":
        return cls(HoroChart.standard(model))

    @property
    def chart(self) -> BusemannChart:
        return self.horo.chart

    @property
    def model(self) -> ModelSpace:
        return self.horo.model

    @property
    def center(self) -> IdealPoint:
        return self.horo.center

    def ideal(self, p: HeisPoint) -> IdealPoint:
        return self.horo.ideal(p)

    def preimage(self, xi: IdealPoint) -> HeisPoint:
        return self.horo.preimage(xi)

    def translate(self, g: HeisPoint, xi: IdealPoint) -> IdealPoint:
        """Image of xi under the left translation by g (an isometry fixing the center)."""
        return self.ideal(group_mul(g, self.preimage(xi)))

    def validate(self, rng: np.random.Generator, samples: int = VALIDATION_SAMPLES,
                 radius: float = 2.0) -> ChartValidation:
        """HoroChart validation plus radial consistency of ideal() with embed()."""
        report = self.horo.validate(rng, samples, radius)
        radial_error = 0.0
        dim, complex_valued = self.model.heisenberg_dim, self.model.is_complex
        for _ in range(samples):
            p = random_heis_point(rng, dim, radius, complex_valued)
            x = radial_project_horosphere(self.chart, self.ideal(p), 0.0)
            radial_error = max(radial_error, distance(x, self.horo.embed(p)))
        return replace(report, radial_error=radial_error)


def radial_project_horosphere(chart: BusemannChart, xi: IdealPoint, t: float) -> ProjectivePoint:
    """
    Point at Busemann level t on the geodesic from the chart center to xi.

    b decreases at unit rate toward the center along that geodesic, so the
    level is a monotone function of the arc length and is found by a
    bracketed root search.

    Raises:
        CenterCollisionError: xi is the chart center
    """
    if projectively_equal(xi, chart.center):
        raise CenterCollisionError("Radial projection from the chart center to itself")
    geodesic = geodesic_between_ideal(chart.center, xi)

    def offset(tau: float) -> float:
        return busemann_value(chart, geodesic(tau)) - t

    guess = t - busemann_value(chart, geodesic(0.0))
    lo, hi = guess - 1.0, guess + 1.0
    for _ in range(8):
        if offset(lo) <= 0.0 <= offset(hi):
            break
        lo, hi = lo - 1.0, hi + 1.0
    else:
        raise BracketError(f"Level {t} not bracketed on the radial geodesic")
    return geodesic(brentq(offset, lo, hi, xtol=1e-13, rtol=4 * np.finfo(float).eps))


def radial_project_sphere(o: ProjectivePoint, x: Vertex) -> TangentVector:
    """
    Unit tangent at o of the geodesic from o to x.

    Raises:
        DegenerateGeodesicError: x = o
    """
    if isinstance(x, ProjectivePoint) and projectively_equal(o, x):
        raise DegenerateGeodesicError("Radial projection of the base point onto its own sphere")
    return unit_tangent_toward(o, x)


def opposite_ideal(o: ProjectivePoint, xi: IdealPoint) -> IdealPoint:
    """The ideal point omega with o on the geodesic from omega to xi."""
    return ray_endpoint(o, unit_tangent_toward(o, xi).scaled(-1.0))


@dataclass
class AmbientSolution:
    """Result of the ambient horospherical solver."""
    length: float
    level: float
    vertical_leak: float = 0.0
    residual: float = 0.0
    lengths: Tuple[float, ...] = ()


def _vertical_leak(chart: BusemannChart, reps: np.ndarray) -> float:
    """Worst component of a level polyline's steps along grad b or J grad b."""
    model = chart.model
    worst = 0.0
    points = [ProjectivePoint(model, rep) for rep in reps]
    for x, y in zip(points[:-1], points[1:]):
        step = log_map(x, y)
        u = gradient_busemann(chart, x).vec
        leak = abs(float(np.real(hermitian_form(u, step.vec))))
        if model.is_complex:
            leak = max(leak, abs(float(np.real(hermitian_form(1j * u, step.vec)))))
        worst = max(worst, leak / step.norm)
    return worst


def ambient_horizontal_solve(hc: HoroChart, p: HeisPoint, q: HeisPoint,
                             resolutions: Sequence[int] = AMBIENT_RESOLUTIONS) -> AmbientSolution:
    """
    d_b between the ideal points over p and q, measured in the ambient space.

    The polyline samples are points of a horosphere H_{b,s} joined by
    horizontal steps; their lengths are ambient distances, the vertical
    endpoint is imposed by an augmented Lagrangian, and the level s is deep
    enough that ambient steps stay near AMBIENT_STEP. The level length times
    e^{-s} is Richardson extrapolated over the resolutions.

    Raises:
        ConvergenceError: optimizer or constraint failure
    """
    rel = group_mul(inverse(p), q)
    estimate = cc_distance(p, q)
    if estimate == 0.0:
        return AmbientSolution(0.0, 0.0)
    rho = koranyi_gauge(rel)
    level = math.log(AMBIENT_STEP * max(resolutions) / estimate)
    complex_valued = hc.model.is_complex
    Z, T = np.array(rel.z) / rho, rel.t / rho ** 2
    k = Z.shape[0]
    scale = math.exp(-level) / rho
    lengths, residual, reps = [], 0.0, None

    for M in resolutions:
        warm = np.diff(cc_geodesic(hc.identity(), rel, M).z, axis=0) / rho

        def to_vars(a):
            return _pack(a) if complex_valued else np.real(a).ravel()

        def relative_path(x, M=M):
            free = _unpack(x, (M - 1, k)) if complex_valued else x.reshape(M - 1, k)
            a = np.vstack([free, (Z - free.sum(axis=0))[None, :]])
            z = np.vstack([np.zeros((1, k), dtype=a.dtype), np.cumsum(a, axis=0)])
            t = np.concatenate([[0.0], np.cumsum(_im_inner(z[:-1], z[1:]))])
            return z, t

        def level_reps(x):
            z, t = relative_path(x)
            return hc.embed_path(HorizontalPath(rho * z, rho ** 2 * t).left_translate(p), level)

        def objective(x, lam, w, M=M):
            c = relative_path(x)[1][-1] - T
            steps = chain_distances(level_reps(x)) * scale
            return M * float(np.sum(steps ** 2)) + lam * c + 0.5 * w * c * c

        x, res = augmented_lagrangian(objective, lambda x: relative_path(x)[1][-1] - T,
                                      to_vars(warm[:-1]), f"ambient horizontal polyline (M={M})",
                                      tol=AMBIENT_CONSTRAINT_TOLERANCE, jac=False)
        reps = level_reps(x)
        lengths.append(math.exp(-level) * float(np.sum(chain_distances(reps))))
        residual = max(residual, res)

    leak = _vertical_leak(BusemannChart(hc.center, hc.basepoint), reps)
    logger.debug(f"ambient d_b lengths {lengths} at level {level:.3f}, vertical leak {leak:.2e}")
    return AmbientSolution(richardson(lengths), level, leak, residual, tuple(lengths))


def horospherical_distance(bc: BoundaryChart, xi: IdealPoint, eta: IdealPoint, method: str = "heis",
                           resolutions: Optional[Sequence[int]] = None) -> float:
    """
    Horospherical distance d_b(xi, eta) of the chart's Busemann function.

    Args:
        bc: boundary chart
        xi, eta: ideal points other than the chart center
        method: "heis" (CC distance of the Heisenberg preimages) or
            "ambient" (horizontal-path optimization on a horosphere)
        resolutions: polyline resolutions for the ambient method

    Raises:
        CenterCollisionError: xi or eta is the chart center
        ConvergenceError: solver failure
    """
    if method not in ("heis", "ambient"):
        raise PreconditionError(f"Unknown horospherical method '{method}'")
    p, q = bc.preimage(xi), bc.preimage(eta)
    if projectively_equal(xi, eta):
        return 0.0
    if method == "heis":
        return cc_distance(p, q)
    return ambient_horizontal_solve(bc.horo, p, q, resolutions or AMBIENT_RESOLUTIONS).length


@dataclass
class LevelCurve:
    """Radial image of a boundary curve on a horosphere H_{b,t}."""
    points: List[ProjectivePoint]
    level: float
    level_length: float
    boundary_length: float
    endpoint_levels: Tuple[float, float]

    @property
    def ratio(self) -> float:
        return self.level_length / self.boundary_length if self.boundary_length > 0.0 else math.nan


def project_curve_to_level(bc: BoundaryChart, path: HorizontalPath, t: float) -> LevelCurve:
    """
    Radially project a horizontal boundary curve to the horosphere at level t.

    Args:
        bc: boundary chart
        path: the curve in Heisenberg coordinates
        t: Busemann level

    Returns:
        LevelCurve whose level_length is close to e^t times the CC length

    Raises:
        ConstraintViolationError: path is not horizontal
    """
    boundary_length = horizontal_length(path)
    points = [radial_project_horosphere(bc.chart, bc.ideal(p), t) for p in path.points()]
    level_length = float(np.sum(chain_distances(np.stack([x.rep for x in points]))))
    levels = (busemann_value(bc.chart, points[0]), busemann_value(bc.chart, points[-1]))
    return LevelCurve(points, t, level_length, boundary_length, levels)


def _sphere_coordinates(o: ProjectivePoint, u: TangentVector) -> np.ndarray:
    model = o.model
    frame = completed_frame(model, [o.rep])
    coords = (frame_inverse(model, frame) @ u.vec)[:-1]
    return coords / np.linalg.norm(coords)


def spherical_distance(o: ProjectivePoint, xi: IdealPoint, eta: IdealPoint,
                       resolutions: Sequence[int] = SPHERE_RESOLUTIONS) -> float:
    """
    d_inf(xi, eta): half the CC distance between rho_o(xi) and rho_o(eta) on
    the unit tangent sphere at o, horizontal distribution E(-1).

    In the real model this is half the round angle. The complex model is
    supported for n = 2, where the sphere is the unit sphere of C^2.

    Raises:
        PreconditionError: complex model with n > 2
        ConvergenceError: sphere solver failure
    """
    model = o.model
    if projectively_equal(xi, eta):
        return 0.0
    u, v = radial_project_sphere(o, xi), radial_project_sphere(o, eta)
    if not model.is_complex:
        chord = math.sqrt(max(float(np.real(hermitian_form(u.vec - v.vec, u.vec - v.vec))), 0.0))
        return math.asin(min(1.0, 0.5 * chord))
    if model.n != 2:
        raise PreconditionError("Spherical distances in complex models are supported for n = 2 only")
    return 0.5 * sphere_cc_distance(_sphere_coordinates(o, u), _sphere_coordinates(o, v), resolutions)


def _ideal_through(chart: BusemannChart, x: ProjectivePoint) -> IdealPoint:
    """r_{b,0}(x): endpoint of the geodesic from the center through x, i.e. 2X + Omega/<X, Omega>."""
    X, W = x.rep, chart.center.rep
    return IdealPoint(chart.model, 2.0 * X + W / hermitian_form(X, W))


def _check_on_horosphere(chart: BusemannChart, x: ProjectivePoint, tol: float):
    level = busemann_value(chart, x)
    if abs(level) > tol:
        raise PreconditionError(f"Point is off the horosphere (b = {level:.3e})")


def horo_to_sphere_map(hc: HoroChart, x: ProjectivePoint, tol: float = HOROSPHERE_TOLERANCE) -> TangentVector:
    """
    f(x) = rho_o(r_{b,0}(x)) for x on H.

    Raises:
        PreconditionError: x off the horosphere beyond tol
    """
    _check_on_horosphere(hc.chart, x, tol)
    return radial_project_sphere(hc.basepoint, _ideal_through(hc.chart, x))


def conformal_factor(hc: HoroChart, x: ProjectivePoint) -> float:
    """
    2 e^{-b_x(o)} where b_x is the Busemann function of the ray from x to
    r_{b,0}(x), normalized at x.
    """
    xi = _ideal_through(hc.chart, x)
    b = math.log(abs(hermitian_form(hc.basepoint.rep, xi.rep)) / abs(hermitian_form(x.rep, xi.rep)))
    return 2.0 * math.exp(-b)


@dataclass
class DifferentialProbe:
    """Finite-difference differential of f along a horizontal direction."""
    stretch: float
    factor: float
    vertical_angle: float

    @property
    def relative_error(self) -> float:
        return abs(self.stretch - self.factor) / self.factor


def probe_differential(hc: HoroChart, p: HeisPoint, v, step: float = DIFFERENCE_STEP) -> DifferentialProbe:
    """
    Central difference of f along the left-invariant field v at embed(p).

    Args:
        hc: horo chart
        p: base point in Heisenberg coordinates
        v: horizontal HeisVector
        step: difference step

    Returns:
        stretch |df(v)| / |v|, the expected conformal factor and the angle
        between df(v) and the sphere's E(-1) (always 0 in real models)

    Raises:
        PreconditionError: v is not horizontal
    """
    if not v.is_horizontal:
        raise PreconditionError("Differential probe needs a horizontal direction")
    x = hc.embed(p)
    plus = horo_to_sphere_map(hc, hc.embed(p * exp_algebra(v, step))).vec
    minus = horo_to_sphere_map(hc, hc.embed(p * exp_algebra(v, -step))).vec
    D = (plus - minus) / (2.0 * step)
    size = math.sqrt(max(float(np.real(hermitian_form(D, D))), 0.0))
    stretch = size / float(np.linalg.norm(v.z))
    angle = 0.0
    if hc.model.is_complex and size > 0.0:
        u0 = horo_to_sphere_map(hc, x).vec
        angle = math.asin(min(1.0, abs(float(np.real(hermitian_form(1j * u0, D)))) / size))
    return DifferentialProbe(stretch, conformal_factor(hc, x), angle)


def horizontal_image_length(hc: HoroChart, path: HorizontalPath) -> float:
    """Round length of the polyline f(sigma) on the unit tangent sphere at the basepoint."""
    vecs = np.stack([horo_to_sphere_map(hc, ProjectivePoint(hc.model, rep)).vec
                     for rep in hc.embed_path(path)])
    diffs = vecs[1:] - vecs[:-1]
    chords = np.sqrt(np.maximum(np.real(hermitian_form(diffs, diffs)), 0.0))
    return float(np.sum(2.0 * np.arcsin(np.minimum(1.0, 0.5 * chords))))


def horosphere_interior_distance(hc: HoroChart, x: ProjectivePoint, y: ProjectivePoint,
                                 resolutions: Sequence[int] = RIEMANNIAN_RESOLUTIONS,
                                 tol: float = HOROSPHERE_TOLERANCE) -> float:
    """
    Interior distance d_H of two points of the horosphere H.

    Raises:
        PreconditionError: a point is off H beyond tol
    """
    _check_on_horosphere(hc.chart, x, tol)
    _check_on_horosphere(hc.chart, y, tol)
    return riemannian_distance(hc.inverse(x), hc.inverse(y), resolutions)


def sandwich_bounds(s: float) -> Tuple[float, float]:
    """(2 sinh(s/2), sinh(s)): horosphere interior distance bounds for ambient distance s."""
    return 2.0 * math.sinh(0.5 * s), math.sinh(s)
