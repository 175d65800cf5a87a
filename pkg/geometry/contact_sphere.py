"""
Contact Sphere Module
Carnot-Caratheodory distance on the unit sphere of C^2 for the contact
distribution orthogonal to the Hopf fibers.

Horizontal curves are horizontal lifts of curves in CP^1. A lift from u ends
at v iff the projected curve joins [u] to [v] and its holonomy matches the
phase of v against the lift of u, so the distance is a constrained length
minimization over polygons of CP^1 written in an affine chart.
"""

import logging
import math
from typing import Optional, Sequence, Tuple

import numpy as np

from geometry.geometry_errors import DimensionMismatchError, NormalizationError
from geometry.heisenberg_group import _pack, _unpack, augmented_lagrangian, richardson

logger = logging.getLogger(__name__)

SPHERE_RESOLUTIONS = (16, 32)
ORTHOGONAL_TOLERANCE = 1e-9
HOLONOMY_TOLERANCE = 1e-13
# holonomy residual accepted from the polygon solver
SPHERE_CONSTRAINT_TOLERANCE = 1e-8
SPHERE_ITERATIONS = 20000


def _unit(vec) -> np.ndarray:
    vec = np.asarray(vec, dtype=np.complex128)
    if vec.shape != (2,):
        raise DimensionMismatchError(f"Sphere points live in C^2, got shape {vec.shape}")
    norm = np.linalg.norm(vec)
    if abs(norm - 1.0) > 1e-8:
        raise NormalizationError(f"Sphere point is not a unit vector (|u| = {norm:.12g})")
    return vec / norm


def wrap_angle(x: float) -> float:
    """Representative of x mod 2 pi in [-pi, pi)."""
    return (x + math.pi) % (2.0 * math.pi) - math.pi


def perpendicular(c: np.ndarray) -> np.ndarray:
    """The unit vector c-perp = (-conj(c2), conj(c1)), Hermitian-orthogonal to c."""
    return np.array([-np.conj(c[1]), np.conj(c[0])])


def chart_coordinates(c: np.ndarray, x: np.ndarray) -> Tuple[float, complex]:
    """
    Fiber angle and affine coordinate of x in the chart centered at [c].

    x = e^{i alpha} (c + w c-perp) / sqrt(1 + |w|^2).
    """
    pc = np.vdot(c, x)
    return float(np.angle(pc)), complex(np.vdot(perpendicular(c), x) / pc)


def polygon_holonomy(w: np.ndarray) -> float:
    """Phase gained by the horizontal lift of the geodesic polygon with vertices w."""
    return float(np.sum(np.angle(1.0 + np.conj(w[:-1]) * w[1:])))


def polygon_steps(w: np.ndarray) -> np.ndarray:
    """sin^2 of the Fubini-Study length of each side."""
    P = 1.0 + np.abs(w) ** 2
    return np.abs(w[:-1] - w[1:]) ** 2 / (P[:-1] * P[1:])


def polygon_length(w: np.ndarray) -> float:
    return float(np.sum(np.arcsin(np.sqrt(np.clip(polygon_steps(w), 0.0, 1.0)))))


def refine_polygon(w: np.ndarray) -> np.ndarray:
    """Vertices of w with the chart midpoint of every side inserted."""
    refined = np.empty(2 * len(w) - 1, dtype=np.complex128)
    refined[0::2] = w
    refined[1::2] = 0.5 * (w[:-1] + w[1:])
    return refined


def _polygon_solve(w_start: complex, w_end: complex, target: float, enclosed: float, M: int,
                   initial: Optional[np.ndarray] = None) -> Tuple[float, np.ndarray]:
    """
    Shortest M-gon from w_start to w_end whose holonomy equals target.

    enclosed is the holonomy relative to the geodesic side w_start w_end and
    sizes the loop of the warm start; initial (M + 1 vertices) replaces that
    loop when given.

    Returns:
        (length, vertices)
    """
    if initial is not None:
        warm = np.asarray(initial, dtype=np.complex128)
    else:
        s = np.linspace(0.0, 1.0, M + 1)
        chord = w_end - w_start
        direction = chord / abs(chord) if abs(chord) > 0.0 else 1.0
        rho = math.sqrt(abs(enclosed) / (2.0 * math.pi))
        sigma = 1.0 if enclosed >= 0.0 else -1.0
        warm = w_start + s * chord + rho * (np.exp(2j * math.pi * sigma * s) - 1.0) * direction

    def vertices(x):
        return np.concatenate([[w_start], _unpack(x, (M - 1, 1))[:, 0], [w_end]])

    def objective(x, lam, weight):
        W = vertices(x)
        P = 1.0 + np.abs(W) ** 2
        d = W[:-1] - W[1:]
        denom = P[:-1] * P[1:]
        steps = np.abs(d) ** 2 / denom
        F = 1.0 + np.conj(W[:-1]) * W[1:]
        c = float(np.sum(np.angle(F))) - target
        g_steps = np.zeros(M + 1, dtype=np.complex128)
        g_steps[:-1] += 2.0 * d / denom - steps * 2.0 * W[:-1] / P[:-1]
        g_steps[1:] += -2.0 * d / denom - steps * 2.0 * W[1:] / P[1:]
        g_phase = np.zeros(M + 1, dtype=np.complex128)
        g_phase[:-1] += -1j * W[1:] / F
        g_phase[1:] += 1j * W[:-1] / np.conj(F)
        grad = M * g_steps + (lam + weight * c) * g_phase
        value = M * float(np.sum(steps)) + lam * c + 0.5 * weight * c * c
        return value, _pack(grad[1:-1, None])

    x, _ = augmented_lagrangian(objective, lambda x: polygon_holonomy(vertices(x)) - target,
                                _pack(warm[1:-1, None]), f"sphere polygon (M={M})",
                                tol=SPHERE_CONSTRAINT_TOLERANCE, maxiter=SPHERE_ITERATIONS)
    W = vertices(x)
    return polygon_length(W), W


def _loop_side_center(c: np.ndarray, w_u: complex, w_v: complex, target: float) -> np.ndarray:
    """
    Chart center on the side of the u-v geodesic where a loop of holonomy
    target bulges, moved further out as the enclosed area grows.

    Counterclockwise polygons carry positive holonomy, so positive targets
    bulge to the right of the chord from w_u to w_v.
    """
    chord = w_v - w_u
    direction = chord / abs(chord) if abs(chord) > 0.0 else 1.0
    side = -1j * math.copysign(1.0, target) * direction
    w = math.tan(0.5 * (abs(target) - 0.5 * math.pi)) * side
    return (c + w * perpendicular(c)) / math.sqrt(1.0 + abs(w) ** 2)


def sphere_cc_distance(u, v, resolutions: Sequence[int] = SPHERE_RESOLUTIONS) -> float:
    """
    Carnot-Caratheodory distance between unit vectors of C^2.

    The holonomy target is read off in the affine chart centered at the
    Fubini-Study midpoint of [u] and [v], where the geodesic joining them is a
    straight segment through 0 with zero holonomy. The polygon is then solved
    in a chart recentered on the side the optimal arc bulges to, so that the
    arc stays away from the chart's point at infinity. Polygon sides are
    Fubini-Study geodesics, so lengths and holonomies are exact; only the
    vertex count is discretized, and the lengths are Richardson extrapolated
    over the resolutions.

    Args:
        u, v: unit vectors of C^2
        resolutions: polygon vertex counts M, 2M, ...

    Returns:
        length of the shortest horizontal curve from u to v

    Raises:
        ConvergenceError: optimizer or holonomy constraint failure
    """
    u, v = _unit(u), _unit(v)
    g = np.vdot(u, v)
    m = abs(g)
    if m < ORTHOGONAL_TOLERANCE:
        return 0.5 * math.pi
    aligned = v * (np.conj(g) / m)
    c = u + aligned
    c = c / np.linalg.norm(c)
    alpha_u, w_u = chart_coordinates(c, u)
    alpha_v, w_v = chart_coordinates(c, v)
    # the lift of a polygon with holonomy phi ends at phase alpha_u - phi
    target = wrap_angle(alpha_u - alpha_v)
    if abs(target) <= HOLONOMY_TOLERANCE:
        return math.acos(min(m, 1.0))
    center = _loop_side_center(c, w_u, w_v, target)
    _, w_u = chart_coordinates(center, u)
    _, w_v = chart_coordinates(center, v)
    shifted_target = float(np.angle(1.0 + np.conj(w_u) * w_v)) + target
    lengths, polygon = [], None
    for M in resolutions:
        initial = refine_polygon(polygon) if polygon is not None and 2 * (len(polygon) - 1) == M else None
        length, polygon = _polygon_solve(w_u, w_v, shifted_target, target, M, initial)
        lengths.append(length)
    logger.debug(f"sphere CC lengths {lengths}")
    return richardson(lengths)
