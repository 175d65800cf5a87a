"""
Tests for the horospherical charts and the distances built on them.
"""

import math

import numpy as np
import pytest

from geometry.geometry_errors import CenterCollisionError, DegenerateGeodesicError, PreconditionError
from geometry.heisenberg_group import (
    HeisPoint,
    HeisVector,
    cc_distance,
    random_heis_point,
    random_horizontal_direction,
    straight_horizontal_path,
)
from geometry.horo_correspondence import (
    BoundaryChart,
    HoroChart,
    conformal_factor,
    horizontal_image_length,
    horo_to_sphere_map,
    horosphere_interior_distance,
    horospherical_distance,
    opposite_ideal,
    probe_differential,
    project_curve_to_level,
    radial_project_horosphere,
    radial_project_sphere,
    sandwich_bounds,
    spherical_distance,
)
from geometry.hyperbolic_model import (
    BusemannChart,
    ModelSpace,
    busemann_value,
    distance,
    geodesic_ray,
    gromov_product_busemann_closed,
    gromov_product_ideal_closed,
    projectively_equal,
)


def heis_sample(model, rng, radius=1.0):
    return random_heis_point(rng, model.heisenberg_dim, radius, model.is_complex)


def random_chart(model, rng):
    return BusemannChart(model.random_ideal(rng), model.random_point(rng, 1.5))


# =============================================================================
# Charts
# =============================================================================

class TestHoroChart:

    def test_identity_is_basepoint(self, model):
        hc = HoroChart.standard(model)
        assert projectively_equal(hc.embed(hc.identity()), model.origin())

    def test_embedded_points_lie_on_the_horosphere(self, model, rng):
        hc = HoroChart(random_chart(model, rng))
        for _ in range(10):
            x = hc.embed(heis_sample(model, rng, 2.0))
            assert busemann_value(hc.chart, x) == pytest.approx(0.0, abs=1e-9)

    def test_embed_at_level(self, model, rng):
        hc = HoroChart.standard(model)
        x = hc.embed_at_level(heis_sample(model, rng), -1.5)
        assert busemann_value(hc.chart, x) == pytest.approx(-1.5, abs=1e-10)

    def test_inverse_recovers_coordinates(self, model, rng):
        hc = HoroChart(random_chart(model, rng))
        p = heis_sample(model, rng)
        q = hc.inverse(hc.embed(p))
        np.testing.assert_allclose(q.z, p.z, atol=1e-9)
        assert q.t == pytest.approx(p.t, abs=1e-9)

    @pytest.mark.parametrize("name", ["real-h2", "real-h3", "complex-h2"])
    def test_validation_passes(self, name):
        model = ModelSpace.from_name(name)
        rng = np.random.default_rng(7)
        hc = HoroChart(random_chart(model, rng))
        report = hc.validate(rng, samples=20)
        assert report.passed(), report

    def test_real_chart_rejects_vertical_coordinates(self, real_h2):
        with pytest.raises(PreconditionError):
            HoroChart.standard(real_h2).embed(HeisPoint([0.5], 1.0))


class TestBoundaryChart:

    def test_preimage_inverts_ideal(self, model, rng):
        bc = BoundaryChart.from_chart(random_chart(model, rng))
        p = heis_sample(model, rng, 2.0)
        q = bc.preimage(bc.ideal(p))
        np.testing.assert_allclose(q.z, p.z, atol=1e-8)
        assert q.t == pytest.approx(p.t, abs=1e-8)

    def test_center_has_no_coordinates(self, model, rng):
        bc = BoundaryChart.from_chart(random_chart(model, rng))
        with pytest.raises(CenterCollisionError):
            bc.preimage(bc.center)

    def test_radial_consistency(self, complex_h2, rng):
        report = BoundaryChart.standard(complex_h2).validate(rng, samples=10)
        assert report.radial_error < 1e-6

    def test_translation_preserves_horospherical_distance(self, complex_h2, rng):
        bc = BoundaryChart.standard(complex_h2)
        p, q, g = (heis_sample(complex_h2, rng) for _ in range(3))
        xi, eta = bc.ideal(p), bc.ideal(q)
        moved = horospherical_distance(bc, bc.translate(g, xi), bc.translate(g, eta))
        assert moved == pytest.approx(horospherical_distance(bc, xi, eta), rel=1e-7)


# =============================================================================
# Horospherical and spherical distances
# =============================================================================

class TestHorosphericalDistance:

    def test_coincident_points(self, complex_h2, rng):
        bc = BoundaryChart.standard(complex_h2)
        xi = bc.ideal(heis_sample(complex_h2, rng))
        assert horospherical_distance(bc, xi, xi) == 0.0

    def test_matches_cc_distance_of_preimages(self, complex_h2, rng):
        bc = BoundaryChart.standard(complex_h2)
        p, q = heis_sample(complex_h2, rng), heis_sample(complex_h2, rng)
        d = horospherical_distance(bc, bc.ideal(p), bc.ideal(q))
        assert d == pytest.approx(cc_distance(p, q), rel=1e-8)

    def test_real_model_identity(self, real_h3, rng):
        bc = BoundaryChart.from_chart(random_chart(real_h3, rng))
        for _ in range(5):
            xi, eta = real_h3.random_ideal(rng), real_h3.random_ideal(rng)
            d = horospherical_distance(bc, xi, eta)
            assert math.exp(-gromov_product_busemann_closed(xi, eta, bc.chart)) == pytest.approx(d, rel=1e-8)

    def test_unknown_method(self, complex_h2, rng):
        bc = BoundaryChart.standard(complex_h2)
        with pytest.raises(PreconditionError):
            horospherical_distance(bc, complex_h2.random_ideal(rng), complex_h2.random_ideal(rng), method="guess")

    @pytest.mark.slow
    def test_ambient_solver_agrees(self, complex_h2):
        bc = BoundaryChart.standard(complex_h2)
        xi, eta = bc.ideal(HeisPoint([0.2 + 0.1j], 0.1)), bc.ideal(HeisPoint([0.6 - 0.3j], -0.2))
        heis = horospherical_distance(bc, xi, eta, method="heis")
        ambient = horospherical_distance(bc, xi, eta, method="ambient")
        assert ambient == pytest.approx(heis, rel=1e-2)


class TestSphericalDistance:

    def test_real_right_angle(self, real_h2):
        o = real_h2.origin()
        xi, eta = real_h2.ideal([1.0, 0.0, 1.0]), real_h2.ideal([0.0, 1.0, 1.0])
        assert spherical_distance(o, xi, eta) == pytest.approx(math.pi / 4)

    def test_real_antipodes(self, real_h3, rng):
        o = real_h3.origin()
        xi = real_h3.random_ideal(rng)
        assert spherical_distance(o, xi, opposite_ideal(o, xi)) == pytest.approx(math.pi / 2)

    def test_coincident_points(self, complex_h2, rng):
        xi = complex_h2.random_ideal(rng)
        assert spherical_distance(complex_h2.origin(), xi, xi) == 0.0

    def test_complex_dimension_limit(self, rng):
        model = ModelSpace("complex", 3)
        with pytest.raises(PreconditionError):
            spherical_distance(model.origin(), model.random_ideal(rng), model.random_ideal(rng))


# =============================================================================
# Radial projections and level curves
# =============================================================================

class TestRadialProjection:

    def test_lands_on_requested_level(self, model, rng):
        chart = random_chart(model, rng)
        xi = model.random_ideal(rng)
        for level in (-2.0, 0.0, 1.5):
            x = radial_project_horosphere(chart, xi, level)
            assert busemann_value(chart, x) == pytest.approx(level, abs=1e-10)

    def test_center_is_rejected(self, model, rng):
        chart = random_chart(model, rng)
        with pytest.raises(CenterCollisionError):
            radial_project_horosphere(chart, chart.center, 0.0)

    def test_sphere_projection_recovers_direction(self, model, rng):
        o = model.random_point(rng, 1.0)
        u = model.random_unit_tangent(rng, o)
        assert radial_project_sphere(o, geodesic_ray(o, u, 2.5)).real_inner(u) == pytest.approx(1.0, abs=1e-9)
        with pytest.raises(DegenerateGeodesicError):
            radial_project_sphere(o, o)

    def test_opposite_ideal_is_opposite(self, model, rng):
        o = model.random_point(rng, 1.0)
        xi = model.random_ideal(rng)
        assert gromov_product_ideal_closed(xi, opposite_ideal(o, xi), o) == pytest.approx(0.0, abs=1e-9)

    def test_level_curves_scale_exponentially(self, complex_h2, rng):
        bc = BoundaryChart.standard(complex_h2)
        v = random_horizontal_direction(rng, 1)
        path = straight_horizontal_path(heis_sample(complex_h2, rng), HeisVector(0.5 * v.z), resolution=256)
        curve = project_curve_to_level(bc, path, 1.0)
        assert curve.ratio == pytest.approx(math.e, rel=1e-3)
        assert curve.endpoint_levels == pytest.approx((1.0, 1.0), abs=1e-9)


# =============================================================================
# The map from the horosphere to the unit tangent sphere
# =============================================================================

class TestSphereMap:

    def test_factor_at_basepoint(self, model):
        hc = HoroChart.standard(model)
        assert conformal_factor(hc, hc.basepoint) == pytest.approx(2.0)

    def test_differential_is_conformal(self, model, rng):
        hc = HoroChart(random_chart(model, rng))
        p = heis_sample(model, rng)
        v = random_horizontal_direction(rng, model.heisenberg_dim, model.is_complex)
        probe = probe_differential(hc, p, v)
        assert probe.relative_error < 1e-6
        assert probe.vertical_angle < 1e-5
        assert probe.factor <= 2.0 + 1e-12

    def test_probe_needs_horizontal_direction(self, complex_h2):
        hc = HoroChart.standard(complex_h2)
        with pytest.raises(PreconditionError):
            probe_differential(hc, hc.identity(), HeisVector([1.0 + 0j], 0.5))

    def test_map_needs_horosphere_points(self, complex_h2):
        hc = HoroChart.standard(complex_h2)
        with pytest.raises(PreconditionError):
            horo_to_sphere_map(hc, hc.embed_at_level(hc.identity(), 0.5))

    def test_image_length_is_at_most_twice_the_length(self, complex_h2, rng):
        hc = HoroChart.standard(complex_h2)
        v = random_horizontal_direction(rng, 1)
        path = straight_horizontal_path(heis_sample(complex_h2, rng), HeisVector(0.8 * v.z), resolution=128)
        assert horizontal_image_length(hc, path) <= 2.0 * 0.8 + 1e-9


class TestInteriorDistance:

    def test_sandwich_endpoints(self):
        assert sandwich_bounds(0.0) == (0.0, 0.0)
        lower, upper = sandwich_bounds(2.0)
        assert lower == pytest.approx(2.0 * math.sinh(1.0))
        assert upper == pytest.approx(math.sinh(2.0))

    def test_real_horosphere_is_flat(self, real_h3, rng):
        hc = HoroChart.standard(real_h3)
        x, y = hc.embed(heis_sample(real_h3, rng, 2.0)), hc.embed(heis_sample(real_h3, rng, 2.0))
        lower, _ = sandwich_bounds(distance(x, y))
        assert horosphere_interior_distance(hc, x, y) == pytest.approx(lower, rel=1e-9)

    @pytest.mark.slow
    def test_complex_sandwich(self, complex_h2, rng):
        hc = HoroChart.standard(complex_h2)
        x, y = hc.embed(heis_sample(complex_h2, rng)), hc.embed(heis_sample(complex_h2, rng))
        lower, upper = sandwich_bounds(distance(x, y))
        d = horosphere_interior_distance(hc, x, y)
        assert lower - 1e-4 <= d <= upper + 1e-4
