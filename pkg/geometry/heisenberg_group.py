"""
Heisenberg Group Module
The Heisenberg group N = E1 + E2 in exponential coordinates (z, t), with
(z, t)(z', t') = (z + z', t + t' + Im<z, z'>), so that [v, w] = 2 Im<v, w>.

Provides dilations, the Koranyi gauge, the Carnot-Caratheodory distance
(shooting and variational solvers) and the left-invariant Riemannian distance
in which E1 + E2 is orthonormal. Real z gives the abelian group used by real
hyperbolic models.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq, minimize

from geometry.geometry_errors import (
    BracketError,
    ConstraintViolationError,
    ConvergenceError,
    DimensionMismatchError,
    DomainError,
    PreconditionError,
)

logger = logging.getLogger(__name__)

SHOOTING_EPSILON = 1e-6
HORIZONTALITY_TOLERANCE = 1e-8
CONSTRAINT_TOLERANCE = 1e-10
PENALTY_WEIGHTS = (10.0, 100.0, 1e3, 1e4)
MAX_OUTER_ITERATIONS = 30
INNER_ITERATIONS = 5000
CC_RESOLUTIONS = (64, 128)
RIEMANNIAN_RESOLUTIONS = (48, 96)


def _as_vector(z) -> np.ndarray:
    vec = np.atleast_1d(np.array(z))
    if vec.ndim != 1:
        raise DimensionMismatchError(f"Heisenberg coordinates must be a 1-D vector, got shape {vec.shape}")
    return vec.astype(np.complex128 if np.iscomplexobj(vec) else np.float64)


def _im_inner(z: np.ndarray, w: np.ndarray, axis: int = -1):
    """Im <z, w> = Im sum conj(z_i) w_i, batched over leading axes."""
    return np.imag(np.sum(np.conj(z) * w, axis=axis))


@dataclass(frozen=True, eq=False)
class HeisPoint:
    """
    Group element (z, t).

    Args:
        z: E1 coordinates, a vector of n - 1 complex (or real) numbers
        t: E2 coordinate
    """
    z: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        vec = _as_vector(self.z)
        vec.setflags(write=False)
        object.__setattr__(self, "z", vec)
        object.__setattr__(self, "t", float(self.t))

    @classmethod
    def identity(cls, dim: int, complex_valued: bool = True) -> "HeisPoint":
        return cls(np.zeros(dim, dtype=np.complex128 if complex_valued else np.float64), 0.0)

    @property
    def dim(self) -> int:
        return self.z.shape[0]

    @property
    def is_complex(self) -> bool:
        return np.iscomplexobj(self.z)

    def __mul__(self, other: "HeisPoint") -> "HeisPoint":
        return group_mul(self, other)

    def inverse(self) -> "HeisPoint":
        return inverse(self)

    def as_tuple(self) -> Tuple[np.ndarray, float]:
        return np.array(self.z), self.t


@dataclass(frozen=True, eq=False)
class HeisVector:
    """Lie algebra element v = (z, t) in E1 + E2."""
    z: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        vec = _as_vector(self.z)
        vec.setflags(write=False)
        object.__setattr__(self, "z", vec)
        object.__setattr__(self, "t", float(self.t))

    @property
    def is_horizontal(self) -> bool:
        return self.t == 0.0

    def bracket(self, other: "HeisVector") -> "HeisVector":
        return bracket(self, other)


def _check_dims(p, q):
    if p.z.shape != q.z.shape:
        raise DimensionMismatchError(f"Heisenberg dimensions differ: {p.z.shape} vs {q.z.shape}")


def bracket(v: HeisVector, w: HeisVector) -> HeisVector:
    """[v, w] = (0, 2 Im<v_z, w_z>)."""
    _check_dims(v, w)
    return HeisVector(np.zeros_like(v.z), 2.0 * float(_im_inner(v.z, w.z)))


def group_mul(p: HeisPoint, q: HeisPoint) -> HeisPoint:
    """(z, t)(z', t') = (z + z', t + t' + Im<z, z'>)."""
    _check_dims(p, q)
    return HeisPoint(p.z + q.z, p.t + q.t + float(_im_inner(p.z, q.z)))


def inverse(p: HeisPoint) -> HeisPoint:
    return HeisPoint(-p.z, -p.t)


def commutator(p: HeisPoint, q: HeisPoint) -> HeisPoint:
    """p q p^-1 q^-1."""
    return group_mul(group_mul(p, q), group_mul(inverse(p), inverse(q)))


def exp_algebra(v: HeisVector, s: float = 1.0) -> HeisPoint:
    """exp(s v); the identity map in exponential coordinates."""
    return HeisPoint(s * v.z, s * v.t)


def dilation(lam: float, p: HeisPoint) -> HeisPoint:
    """
    Homothety h_lambda(z, t) = (lambda z, lambda^2 t).

    Raises:
        DomainError: lambda <= 0
    """
    if not lam > 0.0:
        raise DomainError(f"Dilation factor must be positive, got {lam}")
    return HeisPoint(lam * p.z, lam * lam * p.t)


def koranyi_gauge(p: HeisPoint) -> float:
    """N(z, t) = (|z|^4 + t^2)^(1/4)."""
    r2 = float(np.real(np.vdot(p.z, p.z)))
    return (r2 * r2 + p.t * p.t) ** 0.25


def cygan_distance(p: HeisPoint, q: HeisPoint) -> float:
    """rho(p, q) = N(p^-1 q)."""
    return koranyi_gauge(group_mul(inverse(p), q))


@dataclass(frozen=True, eq=False)
class HorizontalPath:
    """
    Polyline of group elements; step k is the left translate by sample k of
    the straight horizontal segment to sample k + 1.

    Args:
        z: (M + 1, dim) array of E1 coordinates
        t: (M + 1,) array of E2 coordinates
    """
    z: np.ndarray
    t: np.ndarray

    def __post_init__(self):
        z = np.array(self.z)
        if z.ndim == 1:
            z = z[:, None]
        t = np.asarray(self.t, dtype=np.float64).reshape(-1)
        if z.shape[0] != t.shape[0] or z.shape[0] < 2:
            raise PreconditionError(f"Path needs matching samples (z {z.shape}, t {t.shape})")
        z.setflags(write=False)
        t.setflags(write=False)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "t", t)

    @classmethod
    def from_points(cls, points: Sequence[HeisPoint]) -> "HorizontalPath":
        return cls(np.stack([p.z for p in points]), np.array([p.t for p in points]))

    @property
    def resolution(self) -> int:
        return self.z.shape[0] - 1

    def points(self) -> List[HeisPoint]:
        return [HeisPoint(self.z[k], self.t[k]) for k in range(self.z.shape[0])]

    def step_defects(self) -> np.ndarray:
        """Vertical increment minus the group-law term, per step."""
        return np.diff(self.t) - _im_inner(self.z[:-1], self.z[1:])

    def left_translate(self, g: HeisPoint) -> "HorizontalPath":
        return HorizontalPath(g.z[None, :] + self.z, g.t + self.t + _im_inner(g.z[None, :], self.z))

    def dilate(self, lam: float) -> "HorizontalPath":
        if not lam > 0.0:
            raise DomainError(f"Dilation factor must be positive, got {lam}")
        return HorizontalPath(lam * self.z, lam * lam * self.t)


def horizontal_length(path: HorizontalPath, tol: float = HORIZONTALITY_TOLERANCE) -> float:
    """
    Length sum |dz_k| of a horizontal polyline.

    Raises:
        ConstraintViolationError: a step breaks horizontality beyond tol
            (relative to the path's vertical scale)
    """
    defects = np.abs(path.step_defects())
    scale = max(1.0, float(np.max(np.abs(path.t))), float(np.max(np.abs(path.z))) ** 2)
    worst = int(np.argmax(defects))
    if defects[worst] > tol * scale:
        raise ConstraintViolationError("Path is not horizontal", worst, float(defects[worst]))
    return float(np.sum(np.linalg.norm(np.diff(path.z, axis=0), axis=1)))


def straight_horizontal_path(p: HeisPoint, v: HeisVector, resolution: int = 64) -> HorizontalPath:
    """Left translate by p of the segment s -> (s v_z, 0), s in [0, 1]."""
    s = np.linspace(0.0, 1.0, resolution + 1)
    return HorizontalPath(s[:, None] * v.z[None, :], np.zeros(resolution + 1)).left_translate(p)


@dataclass
class CCSolution:
    """Result of a Carnot-Caratheodory solve."""
    length: float
    method: str
    fallback: bool = False
    residual: float = 0.0
    theta: Optional[float] = None
    lengths: Tuple[float, ...] = field(default_factory=tuple)


def _relative(p: HeisPoint, q: HeisPoint) -> Tuple[np.ndarray, float]:
    g = group_mul(inverse(p), q)
    return np.array(g.z), g.t


def vertical_ratio(theta: float) -> float:
    """t / |z|^2 at the endpoint of the geodesic with turning angle theta."""
    if abs(theta) < 1e-4:
        return theta / 6.0 + theta ** 3 / 180.0
    return (theta - math.sin(theta)) / (4.0 * math.sin(0.5 * theta) ** 2)


def shooting_angle(mu: float, epsilon: float = SHOOTING_EPSILON) -> float:
    """
    Root of vertical_ratio(theta) = mu on (-2 pi + eps, 2 pi - eps).

    Raises:
        BracketError: mu beyond the values reachable inside the bracket
    """
    if mu == 0.0:
        return 0.0
    lo, hi = -2.0 * math.pi + epsilon, 2.0 * math.pi - epsilon
    f_lo, f_hi = vertical_ratio(lo) - mu, vertical_ratio(hi) - mu
    if f_lo * f_hi > 0.0:
        raise BracketError(f"Vertical ratio {mu:.6g} outside the shooting bracket", last_values=(f_lo, f_hi))
    return brentq(lambda th: vertical_ratio(th) - mu, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)


def cc_shooting(p: HeisPoint, q: HeisPoint, epsilon: float = SHOOTING_EPSILON) -> CCSolution:
    """
    CC distance by geodesic shooting, reduced to the turning angle theta.

    Geodesics from the identity project to circular arcs of curvature
    theta / L; the endpoint condition t / |z|^2 = vertical_ratio(theta) is a
    scalar equation. Vertical targets (z = 0) give sqrt(2 pi |t|).

    Raises:
        BracketError: the turning angle cannot be bracketed
    """
    _check_dims(p, q)
    Z, T = _relative(p, q)
    r = float(np.linalg.norm(Z))
    if not np.iscomplexobj(Z) or T == 0.0:
        return CCSolution(r, "shooting", theta=0.0)
    if r == 0.0:
        return CCSolution(math.sqrt(2.0 * math.pi * abs(T)), "shooting", theta=math.copysign(2.0 * math.pi, T))
    theta = shooting_angle(T / (r * r), epsilon)
    if abs(theta) > 1.0:
        length = abs(theta) * math.sqrt(T / (theta - math.sin(theta)))
    elif theta == 0.0:
        length = r
    else:
        length = r * (0.5 * theta) / math.sin(0.5 * theta)
    return CCSolution(length, "shooting", theta=theta)


def richardson(lengths: Sequence[float]) -> float:
    """Romberg extrapolation of values at resolutions M, 2M, 4M, ... with even error terms."""
    table = list(lengths)
    power = 4.0
    while len(table) > 1:
        table = [(power * table[i + 1] - table[i]) / (power - 1.0) for i in range(len(table) - 1)]
        power *= 4.0
    return table[0]


def _pack(a: np.ndarray) -> np.ndarray:
    return np.concatenate([a.real.ravel(), a.imag.ravel()])


def _unpack(x: np.ndarray, shape: Tuple[int, int]) -> np.ndarray:
    half = x.size // 2
    return (x[:half] + 1j * x[half:]).reshape(shape)


def _accept(res, label: str, start_value: float, allow_limit: bool = False) -> bool:
    """
    True for a settled inner solve. With allow_limit, a solve cut off by the
    iteration limit after lowering the objective returns False instead of raising.
    """
    # L-BFGS-B reports an abnormal line search once it sits at machine precision.
    if res.success or (res.status == 2 and res.fun <= start_value):
        return True
    if allow_limit and res.status == 1 and res.fun <= start_value:
        return False
    raise ConvergenceError(f"{label}: {res.message}", residual=float(np.linalg.norm(res.jac)))


def augmented_lagrangian(objective, constraint_value, x0: np.ndarray, label: str,
                         tol: float = CONSTRAINT_TOLERANCE, jac: bool = True,
                         maxiter: int = INNER_ITERATIONS) -> Tuple[np.ndarray, float]:
    """
    Minimize objective(x, lam, w) subject to c(x) = 0.

    The objective returns (value, grad), or only the value when jac is False
    (L-BFGS-B then differences it numerically).

    The inner problems are solved with L-BFGS-B; after each settled inner
    solve the multiplier is updated lam += w c with weights following
    PENALTY_WEIGHTS, then held at the last one. An inner solve stopped by
    maxiter is resumed from where it stopped.

    Returns:
        (solution, final constraint residual)

    Raises:
        ConvergenceError: constraint not met after MAX_OUTER_ITERATIONS
    """
    x, lam, c = np.array(x0, dtype=float), 0.0, math.inf
    updates = 0
    for outer in range(MAX_OUTER_ITERATIONS):
        w = PENALTY_WEIGHTS[min(updates, len(PENALTY_WEIGHTS) - 1)]
        start_value = objective(x, lam, w)[0] if jac else objective(x, lam, w)
        res = minimize(objective, x, args=(lam, w), jac=jac, method="L-BFGS-B",
                       options={"maxiter": maxiter, "ftol": 1e-15, "gtol": 1e-12})
        settled = _accept(res, label, start_value, allow_limit=True)
        x = res.x
        c = constraint_value(x)
        logger.debug(f"{label}: outer {outer} weight {w:g} residual {c:.3e} settled {settled}")
        if not settled:
            continue
        if abs(c) <= tol:
            return x, abs(c)
        lam += w * c
        updates += 1
    raise ConvergenceError(f"{label} did not meet its constraint", residual=abs(c))


def _loop_warm_start(Z: np.ndarray, T: float, M: int) -> np.ndarray:
    """Samples of s Z + rho (e^{2 pi i sigma s} - 1) u with 2 pi rho^2 = |T|."""
    s = np.linspace(0.0, 1.0, M + 1)
    r = np.linalg.norm(Z)
    direction = Z / r if r > 0.0 else np.eye(Z.shape[0], dtype=np.complex128)[0]
    rho = math.sqrt(abs(T) / (2.0 * math.pi))
    sigma = 1.0 if T >= 0.0 else -1.0
    loop = rho * (np.exp(2j * math.pi * sigma * s) - 1.0)
    return s[:, None] * Z[None, :] + loop[:, None] * direction[None, :]


def _cc_polyline_length(Z: np.ndarray, T: float, M: int) -> Tuple[float, float]:
    """Shortest M-step horizontal polyline from the identity to (Z, T), unit gauge."""
    k = Z.shape[0]
    increments = np.diff(_loop_warm_start(Z, T, M), axis=0)

    def full(x):
        free = _unpack(x, (M - 1, k))
        return np.vstack([free, (Z - free.sum(axis=0))[None, :]])

    def vertical(a):
        before = np.vstack([np.zeros((1, k)), np.cumsum(a, axis=0)[:-1]])
        return before, float(np.sum(_im_inner(before, a)))

    def objective(x, lam, w):
        a = full(x)
        before, t_end = vertical(a)
        c = t_end - T
        after = Z[None, :] - np.cumsum(a, axis=0)
        grad = 2.0 * M * a + (lam + w * c) * 1j * (before - after)
        value = M * float(np.sum(np.abs(a) ** 2)) + lam * c + 0.5 * w * c * c
        return value, _pack(grad[:-1] - grad[-1][None, :])

    x, residual = augmented_lagrangian(objective, lambda x: vertical(full(x))[1] - T,
                                       _pack(increments[:-1]), f"CC polyline (M={M})")
    return float(np.sum(np.linalg.norm(full(x), axis=1))), residual


def cc_variational(p: HeisPoint, q: HeisPoint, resolutions: Sequence[int] = CC_RESOLUTIONS) -> CCSolution:
    """
    CC distance by discretized horizontal-path length minimization.

    Horizontal increments are the decision variables (the last one is
    eliminated by the endpoint), the vertical coordinate follows from the
    group law, and the vertical endpoint is imposed by an augmented
    Lagrangian. The problem is solved at unit gauge and Richardson
    extrapolated over the resolutions.

    Raises:
        ConvergenceError: optimizer or constraint failure
    """
    _check_dims(p, q)
    Z, T = _relative(p, q)
    if not np.iscomplexobj(Z):
        return CCSolution(float(np.linalg.norm(Z)), "variational")
    rho = koranyi_gauge(HeisPoint(Z, T))
    if rho == 0.0:
        return CCSolution(0.0, "variational")
    lengths, residual = [], 0.0
    for M in resolutions:
        length, res = _cc_polyline_length(Z / rho, T / rho ** 2, M)
        lengths.append(rho * length)
        residual = max(residual, res)
    return CCSolution(richardson(lengths), "variational", residual=residual, lengths=tuple(lengths))


def cc_solve(p: HeisPoint, q: HeisPoint, method: str = "shooting",
             resolutions: Sequence[int] = CC_RESOLUTIONS) -> CCSolution:
    """
    Carnot-Caratheodory distance with solver diagnostics.

    A shooting bracket failure falls back to the variational solver and sets
    the fallback flag.
    """
    if method == "variational":
        return cc_variational(p, q, resolutions)
    if method != "shooting":
        raise PreconditionError(f"Unknown CC method '{method}'")
    try:
        return cc_shooting(p, q)
    except BracketError as e:
        logger.warning(f"Shooting failed ({e}); falling back to the variational solver")
        return replace(cc_variational(p, q, resolutions), fallback=True)


def cc_distance(p: HeisPoint, q: HeisPoint, method: str = "shooting",
                resolutions: Sequence[int] = CC_RESOLUTIONS) -> float:
    """
    Carnot-Caratheodory distance d_E(p, q).

    Args:
        p, q: group elements
        method: "shooting" or "variational"
        resolutions: polyline resolutions for the variational solver

    Returns:
        infimum of lengths of horizontal curves from p to q
    """
    return cc_solve(p, q, method, resolutions).length


def cc_geodesic(p: HeisPoint, q: HeisPoint, resolution: int = 128) -> HorizontalPath:
    """
    Horizontal polyline sampled on the shooting geodesic from p to q.

    The E1 samples lie on the exact geodesic; the E2 samples are accumulated
    with the group law so the polyline is exactly horizontal.
    """
    _check_dims(p, q)
    Z, T = _relative(p, q)
    u = np.linspace(0.0, 1.0, resolution + 1)
    r = float(np.linalg.norm(Z))
    if not np.iscomplexobj(Z) or T == 0.0:
        z = u[:, None] * Z[None, :]
    elif r == 0.0:
        z = _loop_warm_start(Z, T, resolution)
    else:
        solution = cc_shooting(p, q)
        theta = solution.theta
        if abs(theta) < 1e-12:
            zeta = u * r
        else:
            arc = (np.exp(1j * theta * u) - 1.0) / (1j * theta)
            zeta = arc * (r / arc[-1])
        z = zeta[:, None] * (Z / r)[None, :]
    steps = _im_inner(z[:-1], z[1:])
    t = np.concatenate([[0.0], np.cumsum(steps)])
    return HorizontalPath(z, t).left_translate(p)


def _riemannian_polyline_length(Z: np.ndarray, T: float, M: int) -> float:
    """Shortest M-step polyline of one-parameter subgroups from the identity to (Z, T)."""
    k = Z.shape[0]
    s = np.linspace(0.0, 1.0, M + 1)[1:-1]
    bump = 1e-3 * np.sin(math.pi * s) * (1.0 + 1.0j)
    z0 = s[:, None] * Z[None, :] + bump[:, None] * np.eye(k, dtype=np.complex128)[0][None, :]
    x0 = np.concatenate([_pack(z0), s * T])
    nz = 2 * (M - 1) * k

    def path(x):
        z = np.vstack([np.zeros((1, k)), _unpack(x[:nz], (M - 1, k)), Z[None, :]])
        t = np.concatenate([[0.0], x[nz:], [T]])
        dz = np.diff(z, axis=0)
        tau = np.diff(t) - _im_inner(z[:-1], z[1:])
        return z, dz, tau

    def energy(x):
        z, dz, tau = path(x)
        value = M * float(np.sum(np.abs(dz) ** 2) + np.sum(tau ** 2))
        gz = np.zeros_like(z)
        gz[:-1] += 2.0 * M * (-dz + tau[:, None] * 1j * z[1:])
        gz[1:] += 2.0 * M * (dz - tau[:, None] * 1j * z[:-1])
        gt = np.zeros(M + 1)
        gt[:-1] -= 2.0 * M * tau
        gt[1:] += 2.0 * M * tau
        return value, np.concatenate([_pack(gz[1:-1]), gt[1:-1]])

    res = minimize(energy, x0, jac=True, method="L-BFGS-B",
                   options={"maxiter": 10000, "ftol": 1e-15, "gtol": 1e-12})
    _accept(res, f"Riemannian polyline (M={M})", energy(x0)[0])
    _, dz, tau = path(res.x)
    return float(np.sum(np.sqrt(np.sum(np.abs(dz) ** 2, axis=1) + tau ** 2)))


def riemannian_distance(p: HeisPoint, q: HeisPoint,
                        resolutions: Sequence[int] = RIEMANNIAN_RESOLUTIONS) -> float:
    """
    Distance of the left-invariant metric with E1 + E2 orthonormal.

    Minimizes the energy of a polyline of one-parameter subgroups (no
    horizontality constraint) and Richardson extrapolates over resolutions.

    Raises:
        ConvergenceError: optimizer failure
    """
    _check_dims(p, q)
    Z, T = _relative(p, q)
    if not np.iscomplexobj(Z):
        return math.hypot(float(np.linalg.norm(Z)), T)
    if T == 0.0 and not np.any(Z):
        return 0.0
    lengths = [_riemannian_polyline_length(Z, T, M) for M in resolutions]
    return richardson(lengths)


def random_heis_point(rng: np.random.Generator, dim: int, radius: float = 1.0,
                      complex_valued: bool = True) -> HeisPoint:
    """Point with |z| uniform in the disk of the given radius and t uniform in [-radius^2, radius^2]."""
    direction = rng.standard_normal(dim)
    if complex_valued:
        direction = direction + 1j * rng.standard_normal(dim)
    direction = direction / np.linalg.norm(direction)
    z = radius * math.sqrt(rng.uniform()) * direction
    t = rng.uniform(-radius * radius, radius * radius) if complex_valued else 0.0
    return HeisPoint(z, t)


def random_horizontal_direction(rng: np.random.Generator, dim: int, complex_valued: bool = True) -> HeisVector:
    """Unit vector of E1."""
    z = rng.standard_normal(dim)
    if complex_valued:
        z = z + 1j * rng.standard_normal(dim)
    return HeisVector(z / np.linalg.norm(z), 0.0)
