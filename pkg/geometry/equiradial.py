"""
Equiradial Module
Equiradial points of finite, ideal and mixed triangles.

For a triangle with vertices x, y, z the equiradial points u (on yz),
v (on xz) and w (on xy) are where the spheres or horospheres centered at the
vertices touch the opposite sides pairwise: at each vertex the two adjacent
side points are equidistant from it (finite vertex) or lie on one horosphere
(ideal vertex). Their positions are given by Gromov products.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

from geometry.geometry_errors import DegenerateGeodesicError, PreconditionError
from geometry.horo_correspondence import radial_project_horosphere
from geometry.hyperbolic_model import (
    GOLDEN_DELTA,
    BusemannChart,
    IdealPoint,
    ProjectivePoint,
    Vertex,
    busemann_value,
    distance,
    geodesic_ray,
    gromov_product_busemann,
    gromov_product_ideal,
    gromov_product_point,
    point_on_segment,
    projectively_equal,
    unit_tangent_toward,
)

logger = logging.getLogger(__name__)

# side (pair of vertex indices) carrying u, v, w
SIDES = {"u": (1, 2), "v": (0, 2), "w": (0, 1)}
PROBE_STEP = 1e-3
TRUNCATION_DEPTHS = (10.0, 20.0, 30.0)


@dataclass(frozen=True, eq=False)
class TriangleConfig:
    """
    Three pairwise distinct vertices, each a ProjectivePoint or an IdealPoint.

    Raises:
        DegenerateGeodesicError: two vertices coincide
    """
    vertices: Tuple[Vertex, Vertex, Vertex]

    def __post_init__(self):
        vertices = tuple(self.vertices)
        if len(vertices) != 3:
            raise PreconditionError(f"A triangle needs three vertices, got {len(vertices)}")
        for i in range(3):
            for j in range(i + 1, 3):
                if projectively_equal(vertices[i], vertices[j]):
                    raise DegenerateGeodesicError(f"Triangle vertices {i} and {j} coincide")
        object.__setattr__(self, "vertices", vertices)

    @property
    def model(self):
        return self.vertices[0].model

    @property
    def kind(self) -> str:
        ideal = sum(isinstance(p, IdealPoint) for p in self.vertices)
        return ("finite", "mixed_two", "mixed", "ideal")[ideal]

    def vertex_chart(self, i: int) -> BusemannChart:
        """Busemann chart of an ideal vertex, pinned at the model origin."""
        return BusemannChart(self.vertices[i], self.model.origin())


@dataclass(frozen=True, eq=False)
class EquiradialTriple:
    """
    Equiradial points u, v, w of a triangle; SIDES gives the side of each.

    Args:
        config: the triangle
        u, v, w: points on the sides opposite vertex 0, 1 and 2
        deviations: cross-characterization residuals of the construction
    """
    config: TriangleConfig
    u: ProjectivePoint
    v: ProjectivePoint
    w: ProjectivePoint
    deviations: Dict[str, float] = field(default_factory=dict)

    def points(self) -> Dict[str, ProjectivePoint]:
        return {"u": self.u, "v": self.v, "w": self.w}

    @property
    def max_deviation(self) -> float:
        return max(self.deviations.values(), default=0.0)

    def pairwise_distances(self) -> Dict[str, float]:
        return {"uv": distance(self.u, self.v), "uw": distance(self.u, self.w), "vw": distance(self.v, self.w)}


def _radius_function(config: TriangleConfig, i: int):
    """Distance to a finite vertex or Busemann value of an ideal vertex."""
    vertex = config.vertices[i]
    if isinstance(vertex, IdealPoint):
        chart = config.vertex_chart(i)
        return lambda x: busemann_value(chart, x)
    return lambda x: distance(vertex, x)


def defining_residuals(config: TriangleConfig, u: ProjectivePoint, v: ProjectivePoint,
                       w: ProjectivePoint) -> Tuple[float, float, float]:
    """At each vertex, the mismatch of its radius function on its two adjacent side points."""
    adjacent = {0: (v, w), 1: (u, w), 2: (u, v)}
    residuals = []
    for i in range(3):
        f = _radius_function(config, i)
        a, b = adjacent[i]
        residuals.append(abs(f(a) - f(b)))
    return tuple(residuals)


def _toward(x: ProjectivePoint, target: Vertex, s: float) -> ProjectivePoint:
    """Point at distance s from x on the geodesic from x to target."""
    return geodesic_ray(x, unit_tangent_toward(x, target), s)


def equiradial_finite(x: ProjectivePoint, y: ProjectivePoint, z: ProjectivePoint) -> EquiradialTriple:
    """
    Equiradial points of a finite triangle.

    |uz| = |vz| = (x|y)_z, |uy| = |wy| = (x|z)_y, |vx| = |wx| = (y|z)_x.

    Raises:
        DegenerateGeodesicError: coincident vertices
    """
    config = TriangleConfig((x, y, z))
    r_x = gromov_product_point(y, z, x)
    r_y = gromov_product_point(x, z, y)
    r_z = gromov_product_point(x, y, z)
    u = point_on_segment(y, z, r_y)
    v = point_on_segment(x, z, r_x)
    w = point_on_segment(x, y, r_x)
    deviations = {
        "uz": abs(distance(u, z) - r_z),
        "vz": abs(distance(v, z) - r_z),
        "wy": abs(distance(w, y) - r_y),
    }
    return EquiradialTriple(config, u, v, w, deviations)


def equiradial_ideal(xi: IdealPoint, eta: IdealPoint, zeta: IdealPoint) -> EquiradialTriple:
    """
    Equiradial points of an ideal triangle.

    With b centered at xi, v (on xi zeta) and w (on xi eta) sit at level
    (eta|zeta)_b; with b'' centered at zeta, u (on eta zeta) sits at level
    (xi|eta)_b''. The remaining characterizations (b''(v) at that level, and
    b'(u) = b'(w) = (xi|zeta)_b' for b' centered at eta) are reported as
    deviations.

    Raises:
        DegenerateGeodesicError: coincident vertices
        ConvergenceError: a Gromov product limit did not stabilize
    """
    config = TriangleConfig((xi, eta, zeta))
    chart_xi, chart_eta, chart_zeta = (config.vertex_chart(i) for i in range(3))
    level_xi = gromov_product_busemann(eta, zeta, chart_xi)
    level_zeta = gromov_product_busemann(xi, eta, chart_zeta)
    level_eta = gromov_product_busemann(xi, zeta, chart_eta)
    v = radial_project_horosphere(chart_xi, zeta, level_xi)
    w = radial_project_horosphere(chart_xi, eta, level_xi)
    u = radial_project_horosphere(chart_zeta, eta, level_zeta)
    deviations = {
        "zeta_level_v": abs(busemann_value(chart_zeta, v) - level_zeta),
        "eta_level_u": abs(busemann_value(chart_eta, u) - level_eta),
        "eta_level_w": abs(busemann_value(chart_eta, w) - level_eta),
    }
    return EquiradialTriple(config, u, v, w, deviations)


def equiradial_mixed(a: ProjectivePoint, eta: IdealPoint, zeta: IdealPoint) -> EquiradialTriple:
    """
    Equiradial points of a triangle with one finite vertex a.

    v (on a zeta) and w (on a eta) sit at distance (eta|zeta)_a from a; u (on
    eta zeta) sits at Busemann level -(eta|zeta)_a for the chart centered at
    zeta and pinned at a. The chart centered at eta gives the cross-check.

    Raises:
        DegenerateGeodesicError: eta = zeta
        ConvergenceError: the Gromov product limit did not stabilize
    """
    config = TriangleConfig((a, eta, zeta))
    radius = gromov_product_ideal(eta, zeta, a)
    v = _toward(a, zeta, radius)
    w = _toward(a, eta, radius)
    chart_zeta = BusemannChart(zeta, a)
    chart_eta = BusemannChart(eta, a)
    u = radial_project_horosphere(chart_zeta, eta, -radius)
    deviations = {
        "av": abs(distance(a, v) - radius),
        "eta_level_u": abs(busemann_value(chart_eta, u) + radius),
        "eta_level_w": abs(busemann_value(chart_eta, w) + radius),
    }
    return EquiradialTriple(config, u, v, w, deviations)


def gromov_product_mixed(y: ProjectivePoint, zeta: IdealPoint, x: ProjectivePoint) -> float:
    """(y|zeta)_x = (|xy| - b(y)) / 2 for b centered at zeta with b(x) = 0."""
    return 0.5 * (distance(x, y) - busemann_value(BusemannChart(zeta, x), y))


def equiradial_mixed_two(a: ProjectivePoint, b: ProjectivePoint, zeta: IdealPoint) -> EquiradialTriple:
    """
    Equiradial points of a triangle with finite vertices a, b and ideal zeta.

    The spheres at a and b have radii (b|zeta)_a and (a|zeta)_b, which add up
    to |ab|; u and v then lie on one horosphere centered at zeta.

    Raises:
        DegenerateGeodesicError: a = b
    """
    config = TriangleConfig((a, b, zeta))
    r_a = gromov_product_mixed(b, zeta, a)
    r_b = gromov_product_mixed(a, zeta, b)
    u = _toward(b, zeta, r_b)
    v = _toward(a, zeta, r_a)
    w = point_on_segment(a, b, r_a)
    chart = BusemannChart(zeta, a)
    deviations = {
        "radii_sum": abs(r_a + r_b - distance(a, b)),
        "bw": abs(distance(b, w) - r_b),
        "zeta_levels": abs(busemann_value(chart, u) - busemann_value(chart, v)),
    }
    return EquiradialTriple(config, u, v, w, deviations)


def equiradial(vertices: Sequence[Vertex]) -> EquiradialTriple:
    """Dispatch on the number of ideal vertices; finite vertices come first for mixed triangles."""
    config = TriangleConfig(tuple(vertices))
    x, y, z = config.vertices
    builders = {
        "finite": equiradial_finite,
        "ideal": equiradial_ideal,
        "mixed": equiradial_mixed,
        "mixed_two": equiradial_mixed_two,
    }
    kind = config.kind
    expected = {"finite": 0, "mixed": 1, "mixed_two": 2, "ideal": 3}[kind]
    if any(isinstance(p, IdealPoint) for p in config.vertices[:3 - expected]):
        raise PreconditionError("Mixed triangles list their finite vertices first")
    return builders[kind](x, y, z)


@dataclass
class SeparationReport:
    """Points advanced from v and w toward the far vertices of their sides."""
    v_prime: ProjectivePoint
    w_prime: ProjectivePoint
    offset: float
    separation: float
    base_separation: float


def separated_points(triple: EquiradialTriple, offset: float = 1.0 + GOLDEN_DELTA) -> SeparationReport:
    """
    Advance v toward vertex 2 and w toward vertex 1 by offset along their sides.

    Returns:
        SeparationReport with |v'w'| and |vw|
    """
    _, y, z = triple.config.vertices
    v_prime = _toward(triple.v, z, offset)
    w_prime = _toward(triple.w, y, offset)
    return SeparationReport(v_prime, w_prime, offset, distance(v_prime, w_prime), distance(triple.v, triple.w))


def uniqueness_probe(triple: EquiradialTriple, step: float = PROBE_STEP) -> float:
    """
    Smallest worst defining residual over single-point moves by +-step along the sides.

    Moving one equiradial point changes both radius functions of its side at
    unit rate, so the result stays near step when the triple is locally unique.
    """
    config = triple.config
    points = triple.points()
    smallest = math.inf
    for name, (_, far) in SIDES.items():
        for sign in (1.0, -1.0):
            moved = dict(points)
            moved[name] = _toward(points[name], config.vertices[far], sign * step)
            smallest = min(smallest, max(defining_residuals(config, moved["u"], moved["v"], moved["w"])))
    return smallest


def truncation_gap(triple: EquiradialTriple, depth: float) -> float:
    """
    Largest distance between the equiradial points of an ideal triangle and
    those of the finite triangle with vertices at distance depth from the
    origin along the rays toward the ideal vertices.
    """
    if triple.config.kind != "ideal":
        raise PreconditionError("Truncation applies to ideal triangles")
    o = triple.config.model.origin()
    finite = equiradial_finite(*(_toward(o, vertex, depth) for vertex in triple.config.vertices))
    return max(distance(getattr(finite, name), getattr(triple, name)) for name in SIDES)


def truncation_gaps(triple: EquiradialTriple, depths: Sequence[float] = TRUNCATION_DEPTHS) -> List[float]:
    return [truncation_gap(triple, depth) for depth in depths]


@dataclass
class DistortionReport:
    """Two horosphere pairs on the geodesics from the center to xi and eta."""
    offset: float
    near: float
    far: float
    bound: float

    @property
    def slack(self) -> float:
        return self.bound - self.offset


def distortion_bound(chart: BusemannChart, xi: IdealPoint, eta: IdealPoint, level: float,
                     other_level: float) -> DistortionReport:
    """
    Compare |vv'| with ln(sinh A / a), where v, w sit at one Busemann level
    on the geodesics from the center to xi and eta, v', w' at another, and
    A, a are the larger and smaller of |vw| and |v'w'|.

    Raises:
        CenterCollisionError: xi or eta is the chart center
    """
    v = radial_project_horosphere(chart, xi, level)
    w = radial_project_horosphere(chart, eta, level)
    v_prime = radial_project_horosphere(chart, xi, other_level)
    w_prime = radial_project_horosphere(chart, eta, other_level)
    near, far = sorted((distance(v, w), distance(v_prime, w_prime)))
    bound = math.log(math.sinh(far) / near) if near > 0.0 else math.inf
    return DistortionReport(distance(v, v_prime), near, far, bound)
