"""
Axiom Checks Module
Hyperbolicity and metric-property checks (delta-triples, Ptolemy, the
horosphere sandwich, the Heisenberg CC/Riemannian comparison), equiradial
point properties and solver integrity cross-checks.
"""

import logging
import math
from typing import Callable, Dict, List

import numpy as np

from geometry.contact_sphere import sphere_cc_distance
from geometry.equiradial import (
    EquiradialTriple,
    PROBE_STEP,
    distortion_bound,
    equiradial_finite,
    equiradial_ideal,
    equiradial_mixed,
    equiradial_mixed_two,
    separated_points,
    truncation_gaps,
    uniqueness_probe,
)
from geometry.geometry_errors import ConvergenceError
from geometry.heisenberg_group import (
    HeisPoint,
    cc_distance,
    cc_geodesic,
    cc_shooting,
    cc_variational,
    dilation,
    random_heis_point,
    riemannian_distance,
)
from geometry.horo_correspondence import (
    HoroChart,
    horosphere_interior_distance,
    horospherical_distance,
    project_curve_to_level,
    sandwich_bounds,
)
from geometry.hyperbolic_model import (
    busemann_limit,
    busemann_value,
    distance,
    gromov_product_busemann,
    gromov_product_busemann_closed,
    gromov_product_ideal,
    gromov_product_ideal_closed,
    gromov_product_point,
    gromov_product_point_busemann,
    ptolemy_slack,
)
from loggers.report_logger import BoundCheckRecord
from suites.sampling import SuiteContext, encode_heis, encode_vertex, guarded, random_chart, triple_of

logger = logging.getLogger(__name__)

# delta at which Gromov products form delta-triples
AXIOM_DELTA = 0.9625
LEMMA2_BOUND = 17.0
LIMIT_DEPTH = 30.0
FIBER_REFERENCE = 0.5
DISTORTION_SHIFT = 2.0
LEVEL_CURVE_RESOLUTION = 256
LEVEL_CURVE_LEVEL = 1.0
EQUIRADIAL_CHECKS = ("pairwise", "cross_characterization", "separation", "distortion", "uniqueness",
                     "truncation")


def _delta_record(context: SuiteContext, check: str, index: int, values, inputs=None) -> BoundCheckRecord:
    lo, mid, hi = triple_of(values)
    return BoundCheckRecord.measure("axioms", check, index, mid - lo, 0.0, AXIOM_DELTA, context.tol("delta"),
                                    inputs=inputs, quantities={"low": lo, "middle": mid, "high": hi})


def _near_basepoint(hc: HoroChart, rng: np.random.Generator) -> HeisPoint:
    """Heisenberg point whose embedding is within ambient distance 1 of the basepoint."""
    model = hc.model
    p = random_heis_point(rng, model.heisenberg_dim, 1.0, model.is_complex)
    while distance(hc.basepoint, hc.embed(p)) > 1.0:
        p = dilation(0.8, p)
    return p


def _cc_riemannian_ratio(p: HeisPoint, resolutions) -> Dict[str, float]:
    e = HeisPoint.identity(p.dim, p.is_complex)
    d_e = cc_distance(e, p)
    d_h = riemannian_distance(e, p, resolutions)
    return {"d_E": d_e, "d_H": d_h, "ratio": d_e ** 2 / d_h}


def check_axioms(context: SuiteContext, index: int) -> List[BoundCheckRecord]:
    """
    delta-triples for the four Gromov product variants, the Ptolemy
    inequality, the horosphere sandwich, the CC/Riemannian ratio bound and
    (complex models) its constancy on the vertical fiber.
    """
    model = context.model
    rng = context.rng("axioms", index)
    o = model.origin()
    hc = context.boundary_chart.horo
    points = [model.random_point(rng) for _ in range(3)]
    ideals = [model.random_ideal(rng) for _ in range(4)]
    chart = random_chart(model, rng)
    horo_resolutions = context.resolutions("horo_resolution")
    records = []

    x, y, z = points
    records.append(_delta_record(context, "delta_point", index,
                                 [gromov_product_point(x, y, o), gromov_product_point(y, z, o),
                                  gromov_product_point(x, z, o)],
                                 {"points": [encode_vertex(p) for p in points]}))
    records.append(_delta_record(context, "delta_point_busemann", index,
                                 [gromov_product_point_busemann(x, y, chart),
                                  gromov_product_point_busemann(y, z, chart),
                                  gromov_product_point_busemann(x, z, chart)],
                                 {"points": [encode_vertex(p) for p in points]}))

    xi, eta, zeta, theta = ideals
    ideal_inputs = {"ideals": [encode_vertex(p) for p in ideals]}

    def delta_ideal() -> BoundCheckRecord:
        return _delta_record(context, "delta_ideal", index,
                             [gromov_product_ideal(xi, eta, o), gromov_product_ideal(eta, zeta, o),
                              gromov_product_ideal(xi, zeta, o)], ideal_inputs)

    def delta_busemann() -> BoundCheckRecord:
        return _delta_record(context, "delta_busemann", index,
                             [gromov_product_busemann(xi, eta, chart), gromov_product_busemann(eta, zeta, chart),
                              gromov_product_busemann(xi, zeta, chart)], ideal_inputs)

    def ptolemy() -> BoundCheckRecord:
        slack = ptolemy_slack(xi, eta, zeta, theta, o)
        closed = ptolemy_slack(xi, eta, zeta, theta, o, closed=True)
        return BoundCheckRecord.measure("axioms", "ptolemy", index, slack, 0.0, math.inf, context.tol("ptolemy"),
                                        inputs=ideal_inputs,
                                        quantities={"slack_closed": closed, "closed_form_gap": abs(slack - closed)})

    records.append(guarded("axioms", "delta_ideal", index, delta_ideal, ideal_inputs))
    records.append(guarded("axioms", "delta_busemann", index, delta_busemann, ideal_inputs))
    records.append(guarded("axioms", "ptolemy", index, ptolemy, ideal_inputs))

    dim, complex_valued = model.heisenberg_dim, model.is_complex
    p = random_heis_point(rng, dim, 1.0, complex_valued)
    q = p * random_heis_point(rng, dim, 0.8, complex_valued)
    sandwich_inputs = {"p": encode_heis(p), "q": encode_heis(q)}

    def sandwich() -> BoundCheckRecord:
        s = distance(hc.embed(p), hc.embed(q))
        lower, upper = sandwich_bounds(s)
        d_h = horosphere_interior_distance(hc, hc.embed(p), hc.embed(q), horo_resolutions)
        return BoundCheckRecord.measure("axioms", "sandwich", index, d_h, lower, upper, context.tol("optimizer"),
                                        inputs=sandwich_inputs, quantities={"ambient": s, "d_H": d_h})

    records.append(guarded("axioms", "sandwich", index, sandwich, sandwich_inputs))

    near = _near_basepoint(hc, rng)
    near_inputs = {"p": encode_heis(near)}

    def cc_riemannian() -> BoundCheckRecord:
        values = _cc_riemannian_ratio(near, horo_resolutions)
        return BoundCheckRecord.measure("axioms", "cc_riemannian_ratio", index, values["ratio"], 0.0,
                                        LEMMA2_BOUND, context.tol("optimizer"), inputs=near_inputs,
                                        quantities=values)

    records.append(guarded("axioms", "cc_riemannian_ratio", index, cc_riemannian, near_inputs))

    if complex_valued:
        t = math.copysign(rng.uniform(0.05, math.sinh(1.0)), rng.uniform(-1.0, 1.0))
        fiber_point = HeisPoint(np.zeros(dim, dtype=np.complex128), t)
        fiber_inputs = {"t": t}

        def fiber() -> BoundCheckRecord:
            sample = _cc_riemannian_ratio(fiber_point, horo_resolutions)
            reference = _cc_riemannian_ratio(HeisPoint(np.zeros(dim, dtype=np.complex128), FIBER_REFERENCE),
                                             horo_resolutions)
            return BoundCheckRecord.measure("axioms", "fiber_ratio", index, sample["ratio"] / reference["ratio"],
                                            1.0, 1.0, context.tol("fiber"), inputs=fiber_inputs,
                                            quantities={"ratio": sample["ratio"],
                                                        "reference_ratio": reference["ratio"]})

        records.append(guarded("axioms", "fiber_ratio", index, fiber, fiber_inputs))
    return records


def _equiradial_records(context: SuiteContext, triple: EquiradialTriple, rng: np.random.Generator,
                        index: int, inputs: Dict) -> List[BoundCheckRecord]:
    tol = context.tol("equiradial")
    pairwise = triple.pairwise_distances()
    separation = separated_points(triple)
    xi, eta, zeta = triple.config.vertices
    chart = triple.config.vertex_chart(0)
    level = busemann_value(chart, triple.v)
    distortion = distortion_bound(chart, zeta, eta, level, level + rng.uniform(-DISTORTION_SHIFT, DISTORTION_SHIFT))
    gaps = truncation_gaps(triple)
    growth = max(b - a for a, b in zip(gaps[:-1], gaps[1:]))
    return [
        BoundCheckRecord.measure("equiradial", "pairwise", index, max(pairwise.values()), 0.0, AXIOM_DELTA, tol,
                                 inputs=inputs, quantities=pairwise),
        BoundCheckRecord.measure("equiradial", "cross_characterization", index, triple.max_deviation, 0.0, 0.0,
                                 tol, inputs=inputs, quantities=triple.deviations),
        BoundCheckRecord.measure("equiradial", "separation", index, separation.separation, 2.0, math.inf, tol,
                                 inputs=inputs, quantities={"base_separation": separation.base_separation}),
        BoundCheckRecord.measure("equiradial", "distortion", index, distortion.slack, 0.0, math.inf, tol,
                                 inputs=inputs, quantities={"offset": distortion.offset, "near": distortion.near,
                                                            "far": distortion.far, "bound": distortion.bound}),
        BoundCheckRecord.measure("equiradial", "uniqueness", index, uniqueness_probe(triple), 0.5 * PROBE_STEP,
                                 math.inf, 0.0, inputs=inputs),
        BoundCheckRecord.measure("equiradial", "truncation", index, growth, -math.inf, 0.0, tol, inputs=inputs,
                                 quantities={"gaps": gaps}),
    ]


def equiradial_sample(context: SuiteContext, index: int) -> List[BoundCheckRecord]:
    """
    Ideal triangles: pairwise bound, cross-characterizations, separation,
    distortion, local uniqueness and finite-to-ideal convergence. Finite and
    mixed triangles: pairwise bound and construction residuals.
    """
    model = context.model
    rng = context.rng("equiradial", index)
    xi, eta, zeta = (model.random_ideal(rng) for _ in range(3))
    a, b, c = (model.random_point(rng) for _ in range(3))
    inputs = {"ideals": [encode_vertex(p) for p in (xi, eta, zeta)]}
    tol = context.tol("equiradial")
    try:
        records = _equiradial_records(context, equiradial_ideal(xi, eta, zeta), rng, index, inputs)
    except ConvergenceError as e:
        logger.warning(f"equiradial sample {index}: solver did not converge ({e})")
        records = [BoundCheckRecord.soft("equiradial", check, index, e, inputs=inputs) for check in EQUIRADIAL_CHECKS]

    finite_inputs = {"points": [encode_vertex(p) for p in (a, b, c)]}
    finite = equiradial_finite(a, b, c)
    records.append(BoundCheckRecord.measure("equiradial", "finite_pairwise", index,
                                            max(finite.pairwise_distances().values()), 0.0, AXIOM_DELTA, tol,
                                            inputs=finite_inputs, quantities=finite.deviations))

    mixed_inputs = {"a": encode_vertex(a), "b": encode_vertex(b), "eta": encode_vertex(eta),
                    "zeta": encode_vertex(zeta)}

    try:
        mixed = equiradial_mixed(a, eta, zeta)
        records.append(BoundCheckRecord.measure("equiradial", "mixed_pairwise", index,
                                                max(mixed.pairwise_distances().values()), 0.0, AXIOM_DELTA, tol,
                                                inputs=mixed_inputs, quantities=mixed.pairwise_distances()))
        records.append(BoundCheckRecord.measure("equiradial", "mixed_cross_characterization", index,
                                                mixed.max_deviation, 0.0, 0.0, tol, inputs=mixed_inputs,
                                                quantities=mixed.deviations))
    except ConvergenceError as e:
        logger.warning(f"equiradial sample {index}: mixed triangle limit did not converge ({e})")
        records.extend(BoundCheckRecord.soft("equiradial", check, index, e, inputs=mixed_inputs)
                       for check in ("mixed_pairwise", "mixed_cross_characterization"))

    mixed_two = equiradial_mixed_two(a, b, zeta)
    records.append(BoundCheckRecord.measure("equiradial", "mixed_two_cross_characterization", index,
                                            mixed_two.max_deviation, 0.0, 0.0, tol, inputs=mixed_inputs,
                                            quantities=mixed_two.deviations))
    return records


def _relative_gap(a: float, b: float) -> float:
    return abs(a - b) / max(abs(a), 1e-12)


def integrity_sample(context: SuiteContext, index: int) -> List[BoundCheckRecord]:
    """
    Cross-checks of independent computations: shooting vs variational CC
    distance, Heisenberg vs ambient horospherical distance, Busemann and
    Gromov product limits vs closed forms, left-translation invariance,
    length scaling of curves pushed to a horosphere and (complex models) the
    sphere solver on a Hopf fiber.
    """
    model = context.model
    rng = context.rng("integrity", index)
    bc = context.boundary_chart
    dim, complex_valued = model.heisenberg_dim, model.is_complex
    p = random_heis_point(rng, dim, 1.0, complex_valued)
    q = random_heis_point(rng, dim, 1.0, complex_valued)
    g = random_heis_point(rng, dim, 1.0, complex_valued)
    chart = random_chart(model, rng)
    x = model.random_point(rng)
    xi, eta = model.random_ideal(rng), model.random_ideal(rng)
    pair_inputs = {"p": encode_heis(p), "q": encode_heis(q)}
    ideal_inputs = {"xi": encode_vertex(xi), "eta": encode_vertex(eta)}
    optimizer, identity = context.tol("optimizer"), context.tol("identity")

    def solver_agreement() -> BoundCheckRecord:
        shooting = cc_shooting(p, q).length
        variational = cc_variational(p, q, context.resolutions("cc_resolution")).length
        return BoundCheckRecord.measure("integrity", "cc_solver_agreement", index,
                                        _relative_gap(shooting, variational), 0.0, 0.0,
                                        context.tol("solver_agreement"), inputs=pair_inputs,
                                        quantities={"shooting": shooting, "variational": variational})

    def method_agreement() -> BoundCheckRecord:
        a, b = bc.ideal(p), bc.ideal(q)
        heis = horospherical_distance(bc, a, b, "heis")
        ambient = horospherical_distance(bc, a, b, "ambient", context.resolutions("ambient_resolution"))
        return BoundCheckRecord.measure("integrity", "horospherical_method_agreement", index,
                                        _relative_gap(heis, ambient), 0.0, 0.0, optimizer, inputs=pair_inputs,
                                        quantities={"heis": heis, "ambient": ambient})

    def busemann() -> BoundCheckRecord:
        closed, limit = busemann_value(chart, x), busemann_limit(chart, x, LIMIT_DEPTH)
        return BoundCheckRecord.measure("integrity", "busemann_limit", index, abs(closed - limit), 0.0, 0.0,
                                        context.tol("busemann_limit"), inputs={"x": encode_vertex(x)},
                                        quantities={"closed": closed, "limit": limit})

    def gromov_closed() -> BoundCheckRecord:
        at_point = gromov_product_ideal(xi, eta, chart.basepoint)
        at_point_closed = gromov_product_ideal_closed(xi, eta, chart.basepoint)
        busemann_product = gromov_product_busemann(xi, eta, chart)
        busemann_closed = gromov_product_busemann_closed(xi, eta, chart)
        gap = max(abs(at_point - at_point_closed), abs(busemann_product - busemann_closed))
        return BoundCheckRecord.measure("integrity", "gromov_closed_form", index, gap, 0.0, 0.0, identity,
                                        inputs=ideal_inputs,
                                        quantities={"point": at_point, "point_closed": at_point_closed,
                                                    "busemann": busemann_product,
                                                    "busemann_closed": busemann_closed})

    def translation() -> BoundCheckRecord:
        a, b = bc.ideal(p), bc.ideal(q)
        before = gromov_product_busemann(a, b, bc.chart)
        after = gromov_product_busemann(bc.translate(g, a), bc.translate(g, b), bc.chart)
        return BoundCheckRecord.measure("integrity", "translation_invariance", index, abs(before - after),
                                        0.0, 0.0, identity, inputs=dict(pair_inputs, g=encode_heis(g)),
                                        quantities={"before": before, "after": after})

    def level_curve() -> BoundCheckRecord:
        curve = project_curve_to_level(bc, cc_geodesic(p, q, LEVEL_CURVE_RESOLUTION), LEVEL_CURVE_LEVEL)
        scaled = curve.ratio / math.exp(LEVEL_CURVE_LEVEL)
        return BoundCheckRecord.measure("integrity", "level_length_scaling", index, scaled, 1.0, 1.0,
                                        context.tol("length_bound"), inputs=pair_inputs,
                                        quantities={"level_length": curve.level_length,
                                                    "boundary_length": curve.boundary_length})

    checks: Dict[str, Callable[[], BoundCheckRecord]] = {
        "cc_solver_agreement": solver_agreement,
        "horospherical_method_agreement": method_agreement,
        "busemann_limit": busemann,
        "gromov_closed_form": gromov_closed,
        "translation_invariance": translation,
        "level_length_scaling": level_curve,
    }
    records = [guarded("integrity", name, index, compute) for name, compute in checks.items()]

    if complex_valued and model.n == 2:
        theta = rng.uniform(0.1, 2.0 * math.pi - 0.1)
        u = np.array([1.0, 0.0], dtype=np.complex128)

        def fiber() -> BoundCheckRecord:
            length = sphere_cc_distance(u, np.exp(1j * theta) * u, context.resolutions("sphere_resolution"))
            expected = math.sqrt(theta * (2.0 * math.pi - theta))
            return BoundCheckRecord.measure("integrity", "sphere_fiber", index, length / expected, 1.0, 1.0,
                                            optimizer, inputs={"theta": theta},
                                            quantities={"length": length, "expected": expected})

        records.append(guarded("integrity", "sphere_fiber", index, fiber, {"theta": theta}))
    return records


def chart_gate(context: SuiteContext, samples: int) -> List[BoundCheckRecord]:
    """
    Validate the boundary chart before any horospherical distance is trusted:
    level set, left invariance, isometric differential and radial consistency.
    """
    report = context.boundary_chart.validate(context.rng("gate", 0), samples)
    quantities = {"samples": report.samples}
    return [
        BoundCheckRecord.measure("gate", "level", 0, report.level_error, 0.0, 0.0, context.tol("busemann_limit"),
                                 quantities=quantities),
        BoundCheckRecord.measure("gate", "invariance", 0, report.invariance_error, 0.0, 0.0, context.tol("chart"),
                                 quantities=quantities),
        BoundCheckRecord.measure("gate", "isometry", 0, report.isometry_error, 0.0, 0.0, context.tol("chart"),
                                 quantities=quantities),
        BoundCheckRecord.measure("gate", "radial", 0, report.radial_error, 0.0, 0.0, context.tol("identity"),
                                 quantities=quantities),
    ]
