"""
Tests for the Carnot-Caratheodory distance on the unit sphere of C^2.
"""

import math

import numpy as np
import pytest

from geometry.contact_sphere import (
    perpendicular,
    polygon_holonomy,
    polygon_length,
    refine_polygon,
    sphere_cc_distance,
    wrap_angle,
)
from geometry.geometry_errors import DimensionMismatchError, NormalizationError


def random_unit(rng):
    vec = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    return vec / np.linalg.norm(vec)


def random_unitary(rng):
    q, r = np.linalg.qr(rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


class TestHelpers:

    def test_wrap_angle(self):
        assert wrap_angle(0.5) == pytest.approx(0.5)
        assert wrap_angle(3 * math.pi / 2) == pytest.approx(-math.pi / 2)
        assert wrap_angle(-3 * math.pi / 2) == pytest.approx(math.pi / 2)

    def test_perpendicular_is_hermitian_orthogonal(self, rng):
        c = random_unit(rng)
        assert abs(np.vdot(c, perpendicular(c))) < 1e-15
        assert np.linalg.norm(perpendicular(c)) == pytest.approx(1.0)

    def test_segment_through_chart_center(self):
        w = np.linspace(-0.5, 0.5, 9).astype(complex)
        assert polygon_holonomy(w) == 0.0
        assert polygon_length(w) == pytest.approx(2.0 * math.atan(0.5))


    def test_refine_polygon_keeps_vertices(self):
        w = np.array([0.0, 0.5 + 0.5j, 1.0j])
        refined = refine_polygon(w)
        assert len(refined) == 5
        np.testing.assert_array_equal(refined[0::2], w)
        assert refined[1] == pytest.approx(0.25 + 0.25j)


class TestSphereDistance:

    def test_same_point(self, rng):
        u = random_unit(rng)
        assert sphere_cc_distance(u, u) == pytest.approx(0.0, abs=1e-12)

    def test_orthogonal_points(self, rng):
        u = random_unit(rng)
        assert sphere_cc_distance(u, perpendicular(u)) == pytest.approx(math.pi / 2)

    @pytest.mark.parametrize("s", [0.1, 0.7, 1.4])
    def test_horizontal_great_circle(self, rng, s):
        u = random_unit(rng)
        v = math.cos(s) * u + math.sin(s) * perpendicular(u)
        assert sphere_cc_distance(u, v) == pytest.approx(s, rel=1e-12)

    def test_generic_pair_converges(self, rng):
        u, v = random_unit(rng), random_unit(rng)
        d = sphere_cc_distance(u, v)
        round_distance = math.acos(min(1.0, float(np.real(np.vdot(u, v)))))
        assert np.isfinite(d)
        assert d >= round_distance - 1e-6
        assert d <= math.pi + 1e-6

    def test_rejects_non_unit_vectors(self):
        with pytest.raises(NormalizationError):
            sphere_cc_distance([1.0, 1.0], [1.0, 0.0])

    def test_rejects_wrong_dimension(self):
        with pytest.raises(DimensionMismatchError):
            sphere_cc_distance([1.0, 0.0, 0.0], [1.0, 0.0, 0.0])

    @pytest.mark.slow
    @pytest.mark.parametrize("theta", [0.5, math.pi, 2.0])
    def test_hopf_fiber(self, rng, theta):
        u = random_unit(rng)
        expected = math.sqrt(theta * (2.0 * math.pi - theta))
        assert sphere_cc_distance(u, np.exp(1j * theta) * u) == pytest.approx(expected, rel=1e-3)

    @pytest.mark.slow
    def test_unitary_invariance(self, rng):
        u, v = random_unit(rng), random_unit(rng)
        g = random_unitary(rng)
        assert sphere_cc_distance(g @ u, g @ v) == pytest.approx(sphere_cc_distance(u, v), rel=1e-4)

    @pytest.mark.slow
    def test_symmetry_and_triangle_inequality(self, rng):
        u, v, w = (random_unit(rng) for _ in range(3))
        uv = sphere_cc_distance(u, v)
        assert sphere_cc_distance(v, u) == pytest.approx(uv, rel=1e-4)
        assert sphere_cc_distance(u, w) <= uv + sphere_cc_distance(v, w) + 1e-4
