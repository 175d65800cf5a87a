"""
Theorem Checks Module
Bilipschitz comparisons of boundary metrics with exponentials of Gromov
products, the chain of estimates behind the spherical comparison, the exact
identities of real hyperbolic spaces and the conformality of the
horosphere-to-sphere map.

Every sample function takes a SuiteContext and an index and returns the
records of that sample.
"""

import logging
import math
from typing import Any, Dict, List

import numpy as np

from geometry.heisenberg_group import (
    HeisVector,
    cygan_distance,
    horizontal_length,
    random_heis_point,
    random_horizontal_direction,
    straight_horizontal_path,
)
from geometry.horo_correspondence import (
    horizontal_image_length,
    horospherical_distance,
    opposite_ideal,
    probe_differential,
    spherical_distance,
)
from geometry.hyperbolic_model import (
    BusemannChart,
    IdealPoint,
    ProjectivePoint,
    gromov_product_busemann,
    gromov_product_busemann_closed,
    gromov_product_ideal,
)
from geometry.geometry_errors import ConfigurationError, ConvergenceError
from loggers.report_logger import BoundCheckRecord
from suites.sampling import (
    SuiteContext,
    boundary_pair,
    encode_heis,
    encode_vertex,
    guarded,
    ideal_pair,
)

logger = logging.getLogger(__name__)

SEGMENT_LENGTHS = (0.5, 3.0)
SEGMENT_RESOLUTION = 64
LEMMA_CHECKS = ("gromov_gap", "small_distance_implication", "visual_upper_bound")


def check_thm1(context: SuiteContext, xi: IdealPoint, eta: IdealPoint, index: int,
               inputs: Dict[str, Any] = None) -> BoundCheckRecord:
    """
    d_b(xi, eta) e^{(xi|eta)_b} against [c1, c2] for the context's boundary chart.

    Raises:
        ConvergenceError: CC solver or Gromov product limit failure
    """
    bc, constants = context.boundary_chart, context.constants
    d_b = horospherical_distance(bc, xi, eta)
    product = gromov_product_busemann(xi, eta, bc.chart)
    quantities = {
        "d_b": d_b,
        "gromov_product": product,
        "gromov_product_closed": gromov_product_busemann_closed(xi, eta, bc.chart),
        "cygan": cygan_distance(bc.preimage(xi), bc.preimage(eta)),
    }
    return BoundCheckRecord.measure("thm1", "horospherical_ratio", index, d_b * math.exp(product),
                                    constants.c1, constants.c2, context.tol("optimizer"),
                                    inputs=inputs, quantities=quantities)


def thm1_sample(context: SuiteContext, index: int) -> List[BoundCheckRecord]:
    p, q, lam = boundary_pair(context, "thm1", index)
    bc = context.boundary_chart
    inputs = {"p": encode_heis(p), "q": encode_heis(q), "dilation": lam}
    return [guarded("thm1", "horospherical_ratio", index,
                    lambda: check_thm1(context, bc.ideal(p), bc.ideal(q), index, inputs), inputs)]


def check_thm2(context: SuiteContext, xi: IdealPoint, eta: IdealPoint, o: ProjectivePoint, index: int,
               inputs: Dict[str, Any] = None) -> BoundCheckRecord:
    """
    d_inf(xi, eta) e^{(xi|eta)_o} against [c1, c2''].

    Raises:
        ConvergenceError: sphere solver or Gromov product limit failure
    """
    constants = context.constants
    d_inf = spherical_distance(o, xi, eta, context.resolutions("sphere_resolution"))
    product = gromov_product_ideal(xi, eta, o)
    return BoundCheckRecord.measure("thm2", "spherical_ratio", index, d_inf * math.exp(product),
                                    constants.c1, constants.c2_doubleprime, context.tol("optimizer"),
                                    inputs=inputs, quantities={"d_inf": d_inf, "gromov_product": product})


def thm2_sample(context: SuiteContext, index: int) -> List[BoundCheckRecord]:
    xi, eta, near = ideal_pair(context, "thm2", index)
    o = context.model.origin()
    inputs = {"xi": encode_vertex(xi), "eta": encode_vertex(eta), "near_diagonal": near}
    return [guarded("thm2", "spherical_ratio", index,
                    lambda: check_thm2(context, xi, eta, o, index, inputs), inputs)]


def check_lemma_chain(context: SuiteContext, xi: IdealPoint, eta: IdealPoint, o: ProjectivePoint,
                      index: int, inputs: Dict[str, Any] = None) -> List[BoundCheckRecord]:
    """
    The three estimates linking d_inf to (xi|eta)_o, with the Busemann chart
    centered opposite xi and vanishing at o:

    * gromov_gap: |(xi|eta)_b - (xi|eta)_o| <= c3 whenever (xi|eta)_o >= 1 + delta
    * small_distance_implication: d_inf <= 2 e^{-(2 + delta)} forces (xi|eta)_o >= 1 + delta
    * visual_upper_bound: d_inf e^{(xi|eta)_o} <= c2' whenever d_inf <= 2 e^{-(2 + delta)}

    A check whose hypothesis fails is recorded with an infinite upper bound.

    Raises:
        ConvergenceError: sphere solver or Gromov product limit failure
    """
    constants = context.constants
    chart = BusemannChart(opposite_ideal(o, xi), o)
    product_o = gromov_product_ideal(xi, eta, o)
    product_b = gromov_product_busemann(xi, eta, chart)
    d_inf = spherical_distance(o, xi, eta, context.resolutions("sphere_resolution"))
    quantities = {"gromov_product_o": product_o, "gromov_product_b": product_b, "d_inf": d_inf}
    threshold = 1.0 + constants.delta
    close = d_inf <= 2.0 * math.exp(-(2.0 + constants.delta))
    tol = context.tol("optimizer")
    return [
        BoundCheckRecord.measure("lemmas", "gromov_gap", index, abs(product_b - product_o), 0.0,
                                 constants.c3 if product_o >= threshold else math.inf, tol,
                                 inputs=inputs, quantities=quantities),
        BoundCheckRecord.measure("lemmas", "small_distance_implication", index, product_o,
                                 threshold if close else -math.inf, math.inf, tol,
                                 inputs=inputs, quantities=quantities, diagnostics={"close": close}),
        BoundCheckRecord.measure("lemmas", "visual_upper_bound", index, d_inf * math.exp(product_o),
                                 0.0, constants.c2_prime if close else math.inf, tol,
                                 inputs=inputs, quantities=quantities, diagnostics={"close": close}),
    ]


def lemmas_sample(context: SuiteContext, index: int) -> List[BoundCheckRecord]:
    xi, eta, near = ideal_pair(context, "lemmas", index)
    o = context.model.origin()
    inputs = {"xi": encode_vertex(xi), "eta": encode_vertex(eta), "near_diagonal": near}
    try:
        return check_lemma_chain(context, xi, eta, o, index, inputs)
    except ConvergenceError as e:
        logger.warning(f"lemmas sample {index}: solver did not converge ({e})")
        return [BoundCheckRecord.soft("lemmas", check, index, e, inputs=inputs) for check in LEMMA_CHECKS]


def identities_sample(context: SuiteContext, index: int) -> List[BoundCheckRecord]:
    """
    Real hyperbolic spaces: d_b e^{(xi|eta)_b} = 1 in the standard chart and
    e^{-(xi|eta)_o} is half the chordal distance of the ball-model boundary.
    """
    model = context.model
    if model.is_complex:
        raise ConfigurationError("The identities suite needs a real model")
    rng = context.rng("identities", index)
    bc, o = context.boundary_chart, model.origin()
    xi, eta = model.random_ideal(rng), model.random_ideal(rng)
    inputs = {"xi": encode_vertex(xi), "eta": encode_vertex(eta)}
    tol = context.tol("identity")

    def horospherical() -> BoundCheckRecord:
        d_b = horospherical_distance(bc, xi, eta)
        product = gromov_product_busemann(xi, eta, bc.chart)
        return BoundCheckRecord.measure("identities", "horospherical_identity", index, d_b * math.exp(product),
                                        1.0, 1.0, tol, inputs=inputs,
                                        quantities={"d_b": d_b, "gromov_product": product})

    def visual() -> BoundCheckRecord:
        product = gromov_product_ideal(xi, eta, o)
        half_chord = 0.5 * float(np.linalg.norm(xi.boundary_coordinates - eta.boundary_coordinates))
        return BoundCheckRecord.measure("identities", "visual_identity", index,
                                        math.exp(-product) / half_chord, 1.0, 1.0, tol, inputs=inputs,
                                        quantities={"gromov_product": product, "half_chord": half_chord})

    return [guarded("identities", "horospherical_identity", index, horospherical, inputs),
            guarded("identities", "visual_identity", index, visual, inputs)]


def conformal_sample(context: SuiteContext, index: int) -> List[BoundCheckRecord]:
    """
    The horosphere-to-sphere map f: finite-difference stretch along E1 equals
    the conformal factor, E1 lands in the sphere's E(-1), and horizontal
    segments at most double in length.
    """
    model = context.model
    hc = context.boundary_chart.horo
    rng = context.rng("conformal", index)
    dim, complex_valued = model.heisenberg_dim, model.is_complex
    p = random_heis_point(rng, dim, 1.0, complex_valued)
    v = random_horizontal_direction(rng, dim, complex_valued)
    length = rng.uniform(*SEGMENT_LENGTHS)
    inputs = {"p": encode_heis(p), "v": np.asarray(v.z).tolist(), "segment_length": length}
    tol = context.tol("optimizer")
    probe = probe_differential(hc, p, v)
    path = straight_horizontal_path(p, HeisVector(length * np.asarray(v.z), 0.0), SEGMENT_RESOLUTION)
    image = horizontal_image_length(hc, path)
    source = horizontal_length(path)
    return [
        BoundCheckRecord.measure("conformal", "conformal_factor", index, probe.stretch / probe.factor, 1.0, 1.0,
                                 tol, inputs=inputs, quantities={"stretch": probe.stretch, "factor": probe.factor}),
        BoundCheckRecord.measure("conformal", "vertical_angle", index, probe.vertical_angle, 0.0, 0.0, tol,
                                 inputs=inputs),
        BoundCheckRecord.measure("conformal", "length_bound", index, image / source, 0.0, 2.0,
                                 context.tol("length_bound"), inputs=inputs,
                                 quantities={"image_length": image, "source_length": source}),
    ]
