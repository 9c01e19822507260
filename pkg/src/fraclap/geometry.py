"""Domain geometry: epigraphs, cones, balls, half-spaces, and their queries.

Domains are symbolic descriptions of (possibly) unbounded open sets, queried
point-wise. The central family is the epigraph

    Omega = { x in R^N : x_N > phi(x') },   x' = (x_1, ..., x_{N-1}),

with phi drawn from a small catalog of profiles (constant, affine, corner,
cosine, parabola). A rotationally symmetric cone of axis e and opening theta
is the set of directions within angle theta of e; for theta > pi/2 it is the
complement of a narrower cone around -e.

Boundary distances are exact where a closed form exists (half-space, ball,
cone, affine graphs). For the other graphs we return a certified bracket:
the vertical gap g = x_N - phi(x') is always an upper bound, and
g / sqrt(1 + K^2) is a lower bound whenever K bounds the slope of phi over
the horizontal range the nearest boundary point can live in (|x' - t| <= g).

All objects here are immutable and all queries are pure; they are safe to
evaluate concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ConstantPhi",
    "AffinePhi",
    "CornerPhi",
    "CosinePhi",
    "ParabolaPhi",
    "HalfSpace",
    "LipschitzEpigraph",
    "CoerciveEpigraph",
    "Cone",
    "Ball",
    "reflect",
    "cone_intersection_measure",
]


# ---------------------------------------------------------------------------
# graph profiles phi : R^{N-1} -> R
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConstantPhi:
    """phi(x') = c; the epigraph is the half-space {x_N > c}."""

    c: float = 0.0
    coercive = False

    @property
    def lipschitz(self) -> float:
        return 0.0

    def __call__(self, xp: np.ndarray) -> np.ndarray:
        xp = np.asarray(xp, dtype=float)
        shape = xp.shape[:-1] if xp.ndim > 1 else ()
        return np.full(shape, self.c)


@dataclass(frozen=True)
class AffinePhi:
    """phi(x') = a . x'; a tilted half-space with |a| as Lipschitz constant."""

    slope: tuple = (0.0,)
    coercive = False

    @property
    def lipschitz(self) -> float:
        return float(np.linalg.norm(self.slope))

    def __call__(self, xp: np.ndarray) -> np.ndarray:
        xp = np.asarray(xp, dtype=float)
        a = np.asarray(self.slope, dtype=float)
        return xp @ a if xp.ndim > 1 else np.dot(xp, a)


@dataclass(frozen=True)
class CornerPhi:
    """phi(x') = K |x'|; a Lipschitz wedge with a genuine corner at 0."""

    K: float = 1.0
    coercive = True

    @property
    def lipschitz(self) -> float:
        return float(self.K)

    def __call__(self, xp: np.ndarray) -> np.ndarray:
        xp = np.asarray(xp, dtype=float)
        r = np.linalg.norm(xp, axis=-1) if xp.ndim > 1 else abs(float(np.linalg.norm(xp)))
        return self.K * r


@dataclass(frozen=True)
class CosinePhi:
    """phi(x') = A cos(omega x_1); smooth, non-flat, Lipschitz A*omega."""

    A: float = 0.5
    omega: float = 1.0
    coercive = False

    @property
    def lipschitz(self) -> float:
        return abs(self.A * self.omega)

    def __call__(self, xp: np.ndarray) -> np.ndarray:
        xp = np.asarray(xp, dtype=float)
        x1 = xp[..., 0] if xp.ndim > 1 else xp.reshape(-1)[0]
        return self.A * np.cos(self.omega * x1)

    def slope_at(self, xp: np.ndarray) -> np.ndarray:
        xp = np.asarray(xp, dtype=float)
        x1 = xp[..., 0] if xp.ndim > 1 else xp.reshape(-1)[0]
        return -self.A * self.omega * np.sin(self.omega * x1)


@dataclass(frozen=True)
class ParabolaPhi:
    """phi(x') = q |x'|^2; coercive but not globally Lipschitz."""

    q: float = 0.5
    coercive = True

    @property
    def lipschitz(self) -> float:
        return math.inf

    def __call__(self, xp: np.ndarray) -> np.ndarray:
        xp = np.asarray(xp, dtype=float)
        r2 = np.sum(xp * xp, axis=-1) if xp.ndim > 1 else float(np.dot(xp, xp))
        return self.q * r2

    def local_lipschitz(self, xp_norm: float, reach: float) -> float:
        # sup |grad phi| over the disc |t - x'| <= reach
        return 2.0 * self.q * (xp_norm + reach)


# ---------------------------------------------------------------------------
# domains
# ---------------------------------------------------------------------------


def _as_points(x, dim: int) -> np.ndarray:
    pts = np.atleast_2d(np.asarray(x, dtype=float))
    if pts.shape[-1] != dim:
        raise ValueError(f"points have dimension {pts.shape[-1]}, domain has {dim}")
    return pts


@dataclass(frozen=True)
class HalfSpace:
    """Omega = {x_N > level}."""

    dimension: int = 1
    level: float = 0.0

    @property
    def lipschitz(self) -> float:
        return 0.0

    def phi(self, xp):
        xp = np.asarray(xp, dtype=float)
        shape = xp.shape[:-1] if xp.ndim > 1 else ()
        return np.full(shape, self.level)

    def contains(self, x) -> np.ndarray:
        pts = _as_points(x, self.dimension)
        return pts[:, -1] > self.level

    def dist_bounds(self, x):
        pts = _as_points(x, self.dimension)
        d = np.maximum(pts[:, -1] - self.level, 0.0)
        return d, d.copy()


@dataclass(frozen=True)
class LipschitzEpigraph:
    """Omega = {x_N > phi(x')} with globally Lipschitz phi."""

    dimension: int
    phi_spec: object

    def __post_init__(self):
        if not math.isfinite(self.phi_spec.lipschitz):
            raise ValueError("LipschitzEpigraph needs a finite Lipschitz constant; "
                             "use CoerciveEpigraph for the parabola profile")

    @property
    def lipschitz(self) -> float:
        return self.phi_spec.lipschitz

    def phi(self, xp):
        return self.phi_spec(np.asarray(xp, dtype=float))

    def contains(self, x) -> np.ndarray:
        pts = _as_points(x, self.dimension)
        return pts[:, -1] > self.phi(pts[:, :-1])

    def dist_bounds(self, x):
        pts = _as_points(x, self.dimension)
        gap = pts[:, -1] - self.phi(pts[:, :-1])
        gap = np.maximum(gap, 0.0)
        K = self.lipschitz
        lo = gap / math.sqrt(1.0 + K * K)
        if isinstance(self.phi_spec, (AffinePhi, ConstantPhi)):
            # point-to-plane distance is exact for flat graphs
            return lo, lo.copy()
        return lo, gap


@dataclass(frozen=True)
class CoerciveEpigraph:
    """Epigraph of a profile with phi(x') -> +inf as |x'| -> inf.

    Coercivity is checked on samples at the rim of `check_radius`: the profile
    must exceed its value at 0 by `check_margin` there.
    """

    dimension: int
    phi_spec: object
    check_radius: float = 8.0
    check_margin: float = 1.0

    def __post_init__(self):
        if not getattr(self.phi_spec, "coercive", False):
            raise ValueError("profile is not coercive")
        rim = self._rim_samples()
        base = float(self.phi_spec(np.zeros((1, self.dimension - 1))))
        if np.min(self.phi_spec(rim)) < base + self.check_margin:
            raise ValueError("profile fails the coercivity rim check")

    def _rim_samples(self, n: int = 32) -> np.ndarray:
        d = self.dimension - 1
        if d == 1:
            return np.array([[self.check_radius], [-self.check_radius]])
        ang = np.linspace(0.0, 2 * math.pi, n, endpoint=False)
        return self.check_radius * np.stack([np.cos(ang), np.sin(ang)], axis=-1)

    @property
    def lipschitz(self) -> float:
        return self.phi_spec.lipschitz

    def phi(self, xp):
        return self.phi_spec(np.asarray(xp, dtype=float))

    def contains(self, x) -> np.ndarray:
        pts = _as_points(x, self.dimension)
        return pts[:, -1] > self.phi(pts[:, :-1])

    def dist_bounds(self, x):
        pts = _as_points(x, self.dimension)
        gap = np.maximum(pts[:, -1] - self.phi(pts[:, :-1]), 0.0)
        lo = np.empty_like(gap)
        for i, (p, g) in enumerate(zip(pts, gap)):
            if g == 0.0:
                lo[i] = 0.0
                continue
            if isinstance(self.phi_spec, ParabolaPhi):
                K = self.phi_spec.local_lipschitz(float(np.linalg.norm(p[:-1])), float(g))
            else:
                K = self.lipschitz
            lo[i] = g / math.sqrt(1.0 + K * K)
        return lo, gap


@dataclass(frozen=True)
class Cone:
    """Open rotationally symmetric cone of axis `axis` and opening `theta`.

    Membership: the angle between x and the axis is < theta (vertex excluded).
    """

    dimension: int
    axis: tuple
    theta: float
    apex: tuple = None

    def __post_init__(self):
        if not (0.0 < self.theta < math.pi):
            raise ValueError("cone opening must lie in (0, pi)")
        a = np.asarray(self.axis, dtype=float)
        if abs(np.linalg.norm(a) - 1.0) > 1e-12:
            raise ValueError("cone axis must be a unit vector")
        if self.apex is None:
            object.__setattr__(self, "apex", tuple(0.0 for _ in range(self.dimension)))

    def contains(self, x) -> np.ndarray:
        pts = _as_points(x, self.dimension) - np.asarray(self.apex, dtype=float)
        a = np.asarray(self.axis, dtype=float)
        r = np.linalg.norm(pts, axis=1)
        out = np.zeros(len(pts), dtype=bool)
        nz = r > 0
        out[nz] = (pts[nz] @ a) > r[nz] * math.cos(self.theta)
        return out

    def dist_bounds(self, x):
        pts = _as_points(x, self.dimension) - np.asarray(self.apex, dtype=float)
        a = np.asarray(self.axis, dtype=float)
        r = np.linalg.norm(pts, axis=1)
        d = np.zeros(len(pts))
        nz = r > 0
        cosang = np.clip((pts[nz] @ a) / r[nz], -1.0, 1.0)
        ang = np.arccos(cosang)
        inside = ang < self.theta
        # distance from an interior point to the lateral cone surface
        d[nz] = np.where(inside, r[nz] * np.sin(np.minimum(self.theta - ang, math.pi / 2)), 0.0)
        return d, d.copy()


@dataclass(frozen=True)
class Ball:
    """Open ball."""

    dimension: int
    center: tuple
    radius: float

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("ball radius must be positive")

    def contains(self, x) -> np.ndarray:
        pts = _as_points(x, self.dimension)
        c = np.asarray(self.center, dtype=float)
        return np.linalg.norm(pts - c, axis=1) < self.radius

    def dist_bounds(self, x):
        pts = _as_points(x, self.dimension)
        c = np.asarray(self.center, dtype=float)
        d = np.maximum(self.radius - np.linalg.norm(pts - c, axis=1), 0.0)
        return d, d.copy()


def dist_to_boundary(domain, x):
    """Certified (lower, upper) bracket of dist(x, boundary); 0 outside.

    The bracket collapses to the exact value for half-spaces, balls, cones
    and affine epigraphs.
    """
    lo, hi = domain.dist_bounds(x)
    return lo, hi


# ---------------------------------------------------------------------------
# reflections and cone measure
# ---------------------------------------------------------------------------


def reflect(x, lam: float) -> np.ndarray:
    """Reflection across the horizontal plane {x_N = lam}: (x', 2 lam - x_N)."""
    x = np.asarray(x, dtype=float)
    out = x.copy()
    out[..., -1] = 2.0 * lam - x[..., -1]
    return out


def cone_intersection_measure(theta: float, p, r: float, resolution: int = 64,
                              dimension: int = 2, axis=None, boundary_tol: float = 1e-9) -> float:
    """Volume fraction |B_r(p) ∩ cone| / |B_r| on a tensor subgrid.

    `p` must lie on the cone boundary (within `boundary_tol` relative to r).
    The fraction is scale invariant in r up to discretization error.
    """
    if r <= 0:
        raise ValueError("radius must be positive")
    N = dimension
    if axis is None:
        axis = tuple(0.0 for _ in range(N - 1)) + (1.0,)
    cone = Cone(dimension=N, axis=axis, theta=theta)
    p = np.asarray(p, dtype=float)

    # boundary test: angle(p, axis) == theta, or p is the vertex
    if np.linalg.norm(p) > 0:
        cosang = float(np.dot(p, axis) / np.linalg.norm(p))
        ang = math.acos(max(-1.0, min(1.0, cosang)))
        if abs(ang - theta) > boundary_tol + 1e-6:
            raise ValueError("point is not on the cone boundary")

    axes_1d = [np.linspace(c - r, c + r, resolution) for c in p]
    mesh = np.meshgrid(*axes_1d, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=-1)
    in_ball = np.linalg.norm(pts - p, axis=1) <= r
    if not np.any(in_ball):
        raise ValueError("empty ball sample; increase resolution")
    in_cone = cone.contains(pts[in_ball])
    return float(np.count_nonzero(in_cone)) / float(np.count_nonzero(in_ball))
