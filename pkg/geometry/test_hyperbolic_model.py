"""
Tests for the projective models of real and complex hyperbolic space:
distances, geodesics, Busemann functions, Gromov products and the curvature
eigensplit.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from geometry.geometry_errors import (
    CenterCollisionError,
    DegenerateGeodesicError,
    DomainError,
    ModelMismatchError,
    NormalizationError,
    PreconditionError,
    RepresentationError,
)
from geometry.hyperbolic_model import (
    GOLDEN_DELTA,
    BusemannChart,
    ModelSpace,
    TangentVector,
    apply_isometry,
    busemann_limit,
    busemann_value,
    curvature_eigensplit,
    distance,
    eigenspace_dimensions,
    exp_map,
    geodesic_between_ideal,
    geodesic_ray,
    gradient_busemann,
    gromov_product_busemann,
    gromov_product_busemann_closed,
    gromov_product_ideal,
    gromov_product_ideal_closed,
    gromov_product_point,
    gromov_product_point_busemann,
    is_delta_triple,
    jacobi_scale,
    log_map,
    point_on_segment,
    projectively_equal,
    ptolemy_slack,
    ray_endpoint,
    unit_tangent_toward,
    visual_distance,
)

seeds = st.integers(min_value=0, max_value=2 ** 32 - 1)


# =============================================================================
# Model space and points
# =============================================================================

class TestModelSpace:

    def test_signature_has_one_negative_direction(self, model):
        diagonal = np.real(np.diag(model.signature()))
        assert np.sum(diagonal > 0) == model.n
        assert np.sum(diagonal < 0) == 1

    def test_names_round_trip(self):
        assert ModelSpace.from_name("complex-h2") == ModelSpace("complex", 2)
        assert ModelSpace.from_name("real-h3").name == "real-h3"

    def test_unknown_name(self):
        with pytest.raises(PreconditionError):
            ModelSpace.from_name("quaternionic-h2")

    def test_points_are_normalized(self, model, rng):
        x = model.random_point(rng)
        assert model.form(x.rep, x.rep) == pytest.approx(-1.0, abs=1e-12)
        assert np.real(x.rep[-1]) > 0.0

    def test_spacelike_vector_is_rejected(self, real_h2):
        with pytest.raises(RepresentationError):
            real_h2.point([1.0, 0.0, 0.5])

    def test_ideal_point_is_null(self, model, rng):
        xi = model.random_ideal(rng)
        assert abs(model.form(xi.rep, xi.rep)) < 1e-12
        assert xi.rep[-1] == 1.0


# =============================================================================
# Distances and geodesics
# =============================================================================

class TestDistance:

    def test_distance_to_itself(self, model):
        o = model.origin()
        assert distance(o, o) == 0.0

    def test_unit_hyperboloid_point(self, real_h2):
        y = real_h2.point([math.sinh(1.0), 0.0, math.cosh(1.0)])
        assert distance(real_h2.origin(), y) == pytest.approx(1.0, abs=1e-14)

    def test_projective_equality_ignores_phase(self, complex_h2, rng):
        x = complex_h2.random_point(rng)
        y = complex_h2.point(np.exp(0.7j) * x.rep)
        assert projectively_equal(x, y)
        assert distance(x, y) == pytest.approx(0.0, abs=1e-7)

    def test_model_mismatch(self, real_h2, complex_h2):
        with pytest.raises(ModelMismatchError):
            distance(real_h2.origin(), complex_h2.origin())

    @settings(max_examples=50, deadline=None)
    @given(seed=seeds)
    def test_triangle_inequality(self, seed):
        rng = np.random.default_rng(seed)
        for model in (ModelSpace("real", 3), ModelSpace("complex", 2)):
            x, y, z = (model.random_point(rng) for _ in range(3))
            assert distance(x, z) <= distance(x, y) + distance(y, z) + 1e-9

    @settings(max_examples=30, deadline=None)
    @given(seed=seeds)
    def test_isometry_invariance(self, seed):
        rng = np.random.default_rng(seed)
        for model in (ModelSpace("real", 2), ModelSpace("complex", 2)):
            g = model.random_isometry(rng)
            x, y = model.random_point(rng), model.random_point(rng)
            moved = distance(apply_isometry(g, x), apply_isometry(g, y))
            assert moved == pytest.approx(distance(x, y), rel=1e-9, abs=1e-9)


class TestGeodesics:

    def test_ray_starts_at_base(self, model, rng):
        o = model.origin()
        u = model.random_unit_tangent(rng, o)
        assert projectively_equal(geodesic_ray(o, u, 0.0), o)

    def test_ray_has_unit_speed(self, model, rng):
        o = model.origin()
        u = model.random_unit_tangent(rng, o)
        assert distance(o, geodesic_ray(o, u, 5.0)) == pytest.approx(5.0, abs=1e-10)
        assert distance(geodesic_ray(o, u, 1.0), geodesic_ray(o, u, 3.0)) == pytest.approx(2.0, abs=1e-10)

    def test_non_unit_direction(self, model, rng):
        o = model.origin()
        u = model.random_unit_tangent(rng, o)
        with pytest.raises(NormalizationError):
            geodesic_ray(o, u.scaled(2.0), 1.0)

    def test_ray_endpoint_is_limit(self, model, rng):
        o = model.origin()
        u = model.random_unit_tangent(rng, o)
        xi = ray_endpoint(o, u)
        far = geodesic_ray(o, u, 30.0)
        assert unit_tangent_toward(o, far).real_inner(unit_tangent_toward(o, xi)) == pytest.approx(1.0, abs=1e-9)

    def test_antipodal_geodesic_passes_through_origin(self, real_h2):
        xi, eta = real_h2.ideal([-1.0, 0.0, 1.0]), real_h2.ideal([1.0, 0.0, 1.0])
        gamma = geodesic_between_ideal(xi, eta)
        assert projectively_equal(gamma(0.0), real_h2.origin())

    def test_ideal_geodesic_unit_speed_and_reversal(self, model, rng):
        xi, eta = model.random_ideal(rng), model.random_ideal(rng)
        gamma = geodesic_between_ideal(xi, eta)
        assert distance(gamma(0.0), gamma(7.0)) == pytest.approx(7.0, abs=1e-9)
        reverse = geodesic_between_ideal(eta, xi)
        assert distance(reverse(2.0), gamma(-2.0)) == pytest.approx(0.0, abs=1e-7)

    def test_coincident_endpoints(self, model, rng):
        xi = model.random_ideal(rng)
        with pytest.raises(DegenerateGeodesicError):
            geodesic_between_ideal(xi, xi)

    def test_exp_inverts_log(self, model, rng):
        x, y = model.random_point(rng), model.random_point(rng)
        v = log_map(x, y)
        assert v.norm == pytest.approx(distance(x, y), abs=1e-10)
        assert distance(exp_map(v), y) == pytest.approx(0.0, abs=1e-7)

    def test_point_on_segment(self, model, rng):
        x, y = model.random_point(rng), model.random_point(rng)
        d = distance(x, y)
        p = point_on_segment(x, y, 0.3 * d)
        assert distance(x, p) == pytest.approx(0.3 * d, abs=1e-9)
        assert distance(p, y) == pytest.approx(0.7 * d, abs=1e-9)


# =============================================================================
# Busemann functions
# =============================================================================

class TestBusemann:

    def test_vanishes_at_basepoint(self, model, rng):
        chart = BusemannChart(model.random_ideal(rng), model.random_point(rng))
        assert busemann_value(chart, chart.basepoint) == pytest.approx(0.0, abs=1e-12)

    def test_unit_rate_toward_center(self, model, rng):
        chart = BusemannChart(model.random_ideal(rng), model.origin())
        u = chart.toward_center()
        for t in (0.5, 2.0, 6.0):
            assert busemann_value(chart, geodesic_ray(chart.basepoint, u, t)) == pytest.approx(-t, abs=1e-10)

    def test_closed_form_matches_limit(self, model, rng):
        chart = BusemannChart(model.random_ideal(rng), model.random_point(rng, 1.0))
        x = model.random_point(rng)
        assert busemann_limit(chart, x, 30.0) == pytest.approx(busemann_value(chart, x), abs=1e-8)

    def test_charts_with_one_center_differ_by_a_constant(self, model, rng):
        center = model.random_ideal(rng)
        a = BusemannChart(center, model.random_point(rng))
        b = BusemannChart(center, model.random_point(rng))
        points = [model.random_point(rng) for _ in range(5)]
        offsets = [busemann_value(a, x) - busemann_value(b, x) for x in points]
        assert np.ptp(offsets) < 1e-10

    def test_gradient_matches_finite_differences(self, model, rng):
        chart = BusemannChart(model.random_ideal(rng), model.origin())
        x = model.random_point(rng, 2.0)
        v = model.random_unit_tangent(rng, x)
        h = 1e-5
        slope = (busemann_value(chart, exp_map(v.scaled(h))) - busemann_value(chart, exp_map(v.scaled(-h)))) / (2 * h)
        u = gradient_busemann(chart, x)
        assert u.norm == pytest.approx(1.0, abs=1e-12)
        assert slope == pytest.approx(u.real_inner(v), abs=1e-6)

    def test_gradient_points_away_from_center(self, model, rng):
        chart = BusemannChart(model.random_ideal(rng), model.origin())
        x = geodesic_ray(chart.basepoint, chart.toward_center(), 1.0)
        u = gradient_busemann(chart, x)
        assert u.real_inner(chart.toward_center(x)) == pytest.approx(-1.0, abs=1e-10)


# =============================================================================
# Gromov products
# =============================================================================

class TestGromovProducts:

    def test_point_product_edge_cases(self, model, rng):
        o, x, y = model.origin(), model.random_point(rng), model.random_point(rng)
        assert gromov_product_point(x, x, o) == pytest.approx(distance(o, x), abs=1e-12)
        assert gromov_product_point(x, y, x) == pytest.approx(0.0, abs=1e-12)
        expected = 0.5 * (distance(x, o) + distance(y, o) - distance(x, y))
        assert gromov_product_point(x, y, o) == pytest.approx(expected, abs=1e-12)

    def test_ideal_product_on_the_diagonal(self, model, rng):
        xi = model.random_ideal(rng)
        assert gromov_product_ideal(xi, xi, model.origin()) == math.inf

    def test_real_visual_metric_is_half_chord(self, real_h3, rng):
        xi, eta = real_h3.random_ideal(rng), real_h3.random_ideal(rng)
        half_chord = 0.5 * np.linalg.norm(xi.boundary_coordinates - eta.boundary_coordinates)
        product = gromov_product_ideal(xi, eta, real_h3.origin())
        assert math.exp(-product) == pytest.approx(half_chord, rel=1e-7)

    def test_visual_distance(self, real_h2, rng):
        xi, eta = real_h2.random_ideal(rng), real_h2.random_ideal(rng)
        half_chord = 0.5 * np.linalg.norm(xi.boundary_coordinates - eta.boundary_coordinates)
        assert visual_distance(xi, eta, real_h2.origin()) == pytest.approx(half_chord, rel=1e-7)
        assert visual_distance(xi, xi, real_h2.origin()) == 0.0

    def test_point_product_against_a_busemann_function(self, model, rng):
        chart = BusemannChart(model.random_ideal(rng), model.origin())
        x, y = model.random_point(rng), model.random_point(rng)
        assert gromov_product_point_busemann(x, x, chart) == pytest.approx(busemann_value(chart, x), abs=1e-12)
        assert gromov_product_point_busemann(x, y, chart) == pytest.approx(
            gromov_product_point_busemann(y, x, chart), abs=1e-12)

    def test_opposite_points_have_zero_product(self, model, rng):
        o = model.origin()
        u = model.random_unit_tangent(rng, o)
        xi, omega = ray_endpoint(o, u), ray_endpoint(o, u.scaled(-1.0))
        assert gromov_product_ideal(xi, omega, o) == pytest.approx(0.0, abs=1e-7)

    def test_limits_match_closed_forms(self, model, rng):
        chart = BusemannChart(model.random_ideal(rng), model.random_point(rng, 1.0))
        xi, eta = model.random_ideal(rng), model.random_ideal(rng)
        o = model.origin()
        assert gromov_product_ideal(xi, eta, o) == pytest.approx(gromov_product_ideal_closed(xi, eta, o), abs=1e-7)
        assert gromov_product_busemann(xi, eta, chart) == pytest.approx(
            gromov_product_busemann_closed(xi, eta, chart), abs=1e-7)

    def test_shifted_chart_shifts_product(self, model, rng):
        chart = BusemannChart(model.random_ideal(rng), model.origin())
        xi, eta = model.random_ideal(rng), model.random_ideal(rng)
        shifted = chart.shifted(0.75)
        gap = gromov_product_busemann(xi, eta, shifted) - gromov_product_busemann(xi, eta, chart)
        assert gap == pytest.approx(0.75, abs=1e-7)

    def test_center_collision(self, model, rng):
        chart = BusemannChart(model.random_ideal(rng), model.origin())
        with pytest.raises(CenterCollisionError):
            gromov_product_busemann(chart.center, model.random_ideal(rng), chart)

    @settings(max_examples=40, deadline=None)
    @given(seed=seeds)
    def test_ideal_products_form_delta_triples(self, seed):
        rng = np.random.default_rng(seed)
        model = ModelSpace("complex", 2)
        o = model.random_point(rng, 1.0)
        xi, eta, zeta = (model.random_ideal(rng) for _ in range(3))
        products = [gromov_product_ideal_closed(a, b, o) for a, b in ((xi, eta), (eta, zeta), (xi, zeta))]
        assert is_delta_triple(*products, GOLDEN_DELTA + 1e-6)

    def test_product_grows_as_the_pair_closes_up(self, real_h2):
        o = real_h2.origin()
        xi = real_h2.ideal([1.0, 0.0, 1.0])
        products = [gromov_product_ideal(xi, real_h2.ideal([math.cos(a), math.sin(a), 1.0]), o)
                    for a in (3.0, 2.0, 1.0, 0.5, 0.1)]
        assert products[0] == pytest.approx(-math.log(math.sin(1.5)), abs=1e-9)
        assert all(b > a for a, b in zip(products, products[1:]))

    def test_product_grows_as_the_base_leaves_the_geodesic(self, model, rng):
        xi, eta = model.random_ideal(rng), model.random_ideal(rng)
        foot = geodesic_between_ideal(xi, eta)(0.0)
        u = model.random_unit_tangent(rng, foot)
        toward = unit_tangent_toward(foot, xi)
        normal = TangentVector(foot, u.vec - u.real_inner(toward) * toward.vec).unit()
        products = [gromov_product_ideal(xi, eta, geodesic_ray(foot, normal, r)) for r in (0.0, 0.5, 1.0, 2.0, 4.0)]
        assert products[0] == pytest.approx(0.0, abs=1e-7)
        assert all(b > a for a, b in zip(products, products[1:]))

    def test_ptolemy_limit_matches_closed_form(self, model, rng):
        o = model.random_point(rng, 1.0)
        x, y, u, v = (model.random_ideal(rng) for _ in range(4))
        assert ptolemy_slack(x, y, u, v, o) == pytest.approx(ptolemy_slack(x, y, u, v, o, closed=True), abs=1e-9)

    def test_ptolemy_equality_on_a_circle(self, real_h2):
        x, u, y, v = (real_h2.ideal([math.cos(a), math.sin(a), 1.0]) for a in (0.0, 1.0, 2.5, 4.0))
        assert ptolemy_slack(x, y, u, v, real_h2.origin()) == pytest.approx(0.0, abs=1e-10)

    @settings(max_examples=40, deadline=None)
    @given(seed=seeds)
    def test_ptolemy_inequality(self, seed):
        rng = np.random.default_rng(seed)
        model = ModelSpace("complex", 2)
        x, y, u, v = (model.random_ideal(rng) for _ in range(4))
        assert ptolemy_slack(x, y, u, v, model.origin()) >= -1e-7


# =============================================================================
# Curvature eigensplit and Jacobi scaling
# =============================================================================

class TestEigensplit:

    def test_complex_line_direction_is_vertical(self, complex_h2, rng):
        o = complex_h2.origin()
        u = complex_h2.random_unit_tangent(rng, o)
        v1, v2 = curvature_eigensplit(u, TangentVector(o, 1j * u.vec))
        assert v1.norm == pytest.approx(0.0, abs=1e-12)
        assert v2.norm == pytest.approx(1.0, abs=1e-12)

    def test_complex_orthogonal_direction_is_horizontal(self, complex_h2):
        o = complex_h2.origin()
        u = TangentVector(o, [1.0, 0.0, 0.0])
        v = TangentVector(o, [0.0, 1.0 + 1.0j, 0.0])
        v1, v2 = curvature_eigensplit(u, v)
        np.testing.assert_allclose(v1.vec, v.vec, atol=1e-14)
        assert v2.norm == 0.0

    def test_real_model_has_no_vertical_part(self, real_h3, rng):
        o = real_h3.origin()
        u = TangentVector(o, [1.0, 0.0, 0.0, 0.0])
        v = TangentVector(o, [0.0, 0.3, -0.4, 0.0])
        _, v2 = curvature_eigensplit(u, v)
        assert v2.norm == 0.0

    def test_dimensions(self, complex_h2, real_h3):
        assert eigenspace_dimensions(complex_h2) == (2, 1)
        assert eigenspace_dimensions(real_h3) == (2, 0)

    def test_non_orthogonal_input(self, complex_h2):
        o = complex_h2.origin()
        u = TangentVector(o, [1.0, 0.0, 0.0])
        with pytest.raises(PreconditionError):
            curvature_eigensplit(u, TangentVector(o, [1.0, 1.0, 0.0]))

    def test_jacobi_scales(self):
        assert jacobi_scale(-1, 1.3, "sphere") == pytest.approx(math.sinh(1.3))
        assert jacobi_scale(-4, 0.0, "sphere") == 0.0
        assert jacobi_scale(-1, 1.3, "horosphere") == pytest.approx(math.exp(1.3))
        assert jacobi_scale(-4, 0.5, "horosphere") == pytest.approx(math.e)

    def test_jacobi_domain(self):
        with pytest.raises(DomainError):
            jacobi_scale(-2, 1.0, "sphere")


class TestDeltaTriples:

    @pytest.mark.parametrize("triple, delta, expected", [
        ((1.0, 1.0, 5.0), 0.1, True),
        ((1.0, 3.0, 5.0), 0.5, False),
        ((0.0, 0.96, 7.0), 0.9624, True),
    ])
    def test_examples(self, triple, delta, expected):
        assert is_delta_triple(*triple, delta) is expected
