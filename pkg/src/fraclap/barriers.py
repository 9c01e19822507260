"""Barrier functions built from cone profiles, and Harnack chains.

Barriers. From a normalized cone profile v with exponent alpha, fix
R in (0, 1] and set

    z_R = 2 R^{-alpha} v - v^2,
    w_R = z_R  where v < t_hi,   w_R = 1  where v >= t_hi,

where t_lo <= 1 <= t_hi are the roots of 2 R^{-alpha} t - t^2 = 1:

    t_lo = R^{-alpha} - sqrt(R^{-2alpha} - 1),
    t_hi = R^{-alpha} + sqrt(R^{-2alpha} - 1),      t_lo * t_hi = 1.

w_R is nonnegative everywhere, equals 1 outside the ball B_R inside the
narrow cone, and its operator value is bounded below by a positive multiple
of |x|^{2 alpha - 2s} inside the narrow cone near the vertex, for R below
some empirical threshold found here by bisection. The operator value is
certified by quadrature of the definition: a stencil window, a polar-cell
extension fed by the profile's homogeneous continuation, and a final tail
bounded by the analytic supremum sup w_R = R^{-2 alpha}.

Chains. A Harnack chain climbs from a near-boundary point x_0 = (0', d)
into a cone {|x'| < tan(beta) x_N} through balls of geometrically growing
radius,

    r_k = d sin(beta) (1 + tan(beta))^k,
    x_{k,N} = d (1 + tan(beta))^k,

inscribed (tangent) in the cone. The terminal index k0 is the first k whose
ball has climbed past height h1 while staying under h2; it exists whenever

    log(h2 / (1 + sin beta)) / log(1 + tan beta)
        - log(h1) / log(1 + tan beta) > 1,

and is bracketed by affine functions of log d. Multiplying one Harnack
constant per step turns the chain into a power-law lower bound with
exponent proportional to log of that constant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .cones import ConeProfile
from .geometry import Cone
from .grid import CallableExterior, GridFunction, UniformGrid
from .operator import normalization_constant, sphere_measure
from .util import loglog_fit

__all__ = [
    "BarrierParams",
    "barrier_zR",
    "barrier_wR",
    "verify_barrier_inequality",
    "find_barrier_radius",
    "BarrierCheck",
    "boundary_decay_estimate",
    "lower_growth_fit",
    "HarnackChain",
    "build_chain",
    "chain_admissible",
    "verify_chain_harnack",
]


# ---------------------------------------------------------------------------
# barrier algebra
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BarrierParams:
    """Radius, exponent and the truncation roots of the barrier."""

    R: float
    alpha: float
    C0: float = None

    def __post_init__(self):
        if not (0.0 < self.R <= 1.0):
            raise ValueError("barrier radius must lie in (0, 1] for real roots")
        if self.alpha is None or self.alpha <= 0:
            raise ValueError("need a positive fitted exponent")

    @property
    def coeff(self) -> float:
        return 2.0 * self.R ** (-self.alpha)

    @property
    def root_lo(self) -> float:
        ra = self.R ** (-self.alpha)
        return ra - math.sqrt(ra * ra - 1.0)

    @property
    def root_hi(self) -> float:
        ra = self.R ** (-self.alpha)
        return ra + math.sqrt(ra * ra - 1.0)

    @property
    def sup_w(self) -> float:
        """Global supremum of w_R: the parabola's peak value R^{-2 alpha}."""
        return self.R ** (-2.0 * self.alpha)


def _z_of_v(v, params: BarrierParams):
    return params.coeff * v - v * v


def _w_of_v(v, params: BarrierParams):
    z = _z_of_v(v, params)
    return np.where(v >= params.root_hi, 1.0, z)


def barrier_zR(profile: ConeProfile, R: float) -> GridFunction:
    """z_R = 2 R^{-alpha} v - v^2 on the profile's grid."""
    if not profile.normalized:
        raise ValueError("barrier needs a normalized profile")
    params = BarrierParams(R, profile.alpha, profile.C0)
    vals = _z_of_v(profile.field.values, params)
    return GridFunction(profile.grid, vals, profile.field.exterior)


def barrier_wR(profile: ConeProfile, R: float) -> GridFunction:
    """w_R: z_R capped to 1 on the high-level set {v >= t_hi}."""
    if not profile.normalized:
        raise ValueError("barrier needs a normalized profile")
    params = BarrierParams(R, profile.alpha, profile.C0)
    vals = _w_of_v(profile.field.values, params)
    return GridFunction(profile.grid, vals, profile.field.exterior)


@dataclass
class BarrierCheck:
    R: float
    min_normalized: float
    values: np.ndarray
    sample_points: np.ndarray

    @property
    def passed(self) -> bool:
        return self.min_normalized > 0.0


def _polar_cells(N: int, r_lo: float, r_hi: float, s: float, n_rad: int = 48,
                 n_ang: int = 64):
    """(centroid, kernel mass) pairs tiling the annulus r_lo < |z| < r_hi.

    Radial kernel integrals are exact per cell; only the value of the field
    at the centroid is approximate. Supported for N in {1, 2}.
    """
    c = normalization_constant(N, s)
    edges = np.geomspace(r_lo, r_hi, n_rad + 1)
    r_mid = np.sqrt(edges[:-1] * edges[1:])
    radial_mass = (edges[:-1] ** (-2 * s) - edges[1:] ** (-2 * s)) / (2 * s)
    if N == 1:
        cents = np.concatenate([r_mid, -r_mid])[:, None]
        mass = np.concatenate([radial_mass, radial_mass]) * c
        return cents, mass
    if N == 2:
        ang = (np.arange(n_ang) + 0.5) * (2 * math.pi / n_ang)
        dphi = 2 * math.pi / n_ang
        cents = np.stack(
            [np.outer(r_mid, np.cos(ang)).ravel(), np.outer(r_mid, np.sin(ang)).ravel()],
            axis=-1,
        )
        mass = np.outer(radial_mass, np.full(n_ang, dphi)).ravel() * c
        return cents, mass
    raise ValueError("polar extension supports N <= 2")


def verify_barrier_inequality(profile: ConeProfile, R: float, theta1: float = None,
                              samples: int = 24, v_callable=None,
                              extend_factor: float = 4.0) -> BarrierCheck:
    """Certified quadrature check of the barrier inequality near the vertex.

    Returns the minimum over narrow-cone samples in B_R of
    (operator value of w_R at x) * |x|^{2s - 2 alpha}. The quadrature uses
    the stencil window, polar cells out to where w_R settles at 1, and a
    final tail bounded below with sup w_R; a positive result certifies the
    inequality at the sampled scale.

    `v_callable` overrides the profile's homogeneous continuation (used by
    analytic calibrations).
    """
    if not profile.normalized:
        raise ValueError("barrier needs a normalized profile")
    g = profile.grid
    N = g.dimension
    h = g.h
    if R < 4 * h:
        raise ValueError("sample set empty: R is below 4 cells")
    th1 = theta1 if theta1 is not None else profile.theta1
    params = BarrierParams(R, profile.alpha, profile.C0)
    s, alpha = profile.s, profile.alpha

    v_ext = v_callable if v_callable is not None else profile.homogeneous_extension()

    def w_at(pts):
        return _w_of_v(np.asarray(v_ext(pts), dtype=float), params)

    # sample nodes in the narrow cone inside B_R, off the vertex cell
    cone1 = profile.cone(th1)
    pts = g.points()
    r = np.linalg.norm(pts, axis=1)
    cand = cone1.contains(pts) & (r < R) & (r > 2 * h)
    idx = np.where(cand)[0]
    if idx.size == 0:
        raise ValueError("sample set empty inside the narrow cone")
    order = idx[np.argsort(r[idx])]
    pick = order[np.linspace(0, len(order) - 1, min(samples, len(order))).astype(int)]
    spts = pts[pick]

    op = profile.operator
    W = op.W
    A = W * h

    wf = GridFunction(g, _w_of_v(profile.field.values, params),
                      CallableExterior(func=w_at, far_field=1.0))
    P = wf.padded(W)

    # polar extension out to where the high-level set has taken over
    r_settle = extend_factor * max(params.root_hi ** (1.0 / alpha), A)
    cents, mass = _polar_cells(N, A, r_settle, s)
    tail_final = normalization_constant(N, s) * sphere_measure(N) \
        * r_settle ** (-2 * s) / (2 * s)

    weights = op.weights
    it = np.nditer(weights, flags=["multi_index"])
    terms = []
    for wv in it:
        wgt = float(wv)
        if wgt == 0.0:
            continue
        k = tuple(i - W for i in it.multi_index)
        if not any(k):
            continue
        terms.append((k, wgt))

    vals = np.empty(len(spts))
    for n, x in enumerate(spts):
        ix = g.index_of(x)
        wx = float(wf.values[ix])
        acc = 0.0
        for k, wgt in terms:
            nb = tuple(W + i + kk for i, kk in zip(ix, k))
            acc += wgt * (wx - P[nb])
        w_far = w_at(x[None, :] + cents)
        acc += float(np.sum(mass * (wx - w_far)))
        acc += (wx - params.sup_w) * tail_final
        rx = float(np.linalg.norm(x))
        vals[n] = acc * rx ** (2 * s - 2 * alpha)

    return BarrierCheck(R=R, min_normalized=float(np.min(vals)), values=vals,
                        sample_points=spts)


def find_barrier_radius(profile: ConeProfile, steps: int = 10, r_hi: float = 1.0,
                        **kwargs) -> float:
    """Empirical largest radius where the barrier check passes (bisection).

    Returns 0.0 when even the smallest admissible radius fails.
    """
    g = profile.grid
    r_lo = 5 * g.h
    if not verify_barrier_inequality(profile, r_lo, **kwargs).passed:
        return 0.0
    if verify_barrier_inequality(profile, min(r_hi, 1.0), **kwargs).passed:
        return float(min(r_hi, 1.0))
    lo, hi = r_lo, min(r_hi, 1.0)
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        if verify_barrier_inequality(profile, mid, **kwargs).passed:
            lo = mid
        else:
            hi = mid
    return float(lo)


# ---------------------------------------------------------------------------
# boundary envelope fits
# ---------------------------------------------------------------------------


def _shell_envelope(dist, vals, d_min, d_max, ratio, kind):
    """Geometric shells [d, ratio d) with per-shell sup or inf of vals."""
    rows = []
    d = d_min
    while d < d_max:
        sel = (dist >= d) & (dist < d * ratio)
        if np.any(sel):
            v = vals[sel]
            rows.append((d * math.sqrt(ratio), float(np.max(v)) if kind == "sup"
                         else float(np.min(v)), int(sel.sum())))
        d *= ratio
    return rows


def boundary_decay_estimate(u: GridFunction, domain, s: float, node_mask=None,
                            d_min: float = None, d_max: float = None,
                            ratio: float = 1.25):
    """Fit sup-shell |u| against boundary distance: upper envelope exponent.

    Returns (alpha_fit, C_fit, r_squared). Raises when fewer than a decade
    of shells is available or the exponent leaves (0, s + 0.05).
    """
    g = u.grid
    pts = g.points()
    lo, _ = domain.dist_bounds(pts)
    dist = lo.reshape(g.shape)
    mask = np.ones(g.shape, dtype=bool) if node_mask is None else node_mask
    mask = mask & (dist > 0)
    d = dist[mask]
    v = np.abs(u.values[mask])
    if d_min is None:
        d_min = 2 * g.h
    if d_max is None:
        d_max = float(np.max(d))
    if d_max / d_min < 10.0:
        raise ValueError("insufficient shells: need at least one decade of distances")
    rows = _shell_envelope(d, v, d_min, d_max, ratio, "sup")
    if len(rows) < 6:
        raise ValueError("insufficient shells for the decay fit")
    mids = np.array([r[0] for r in rows])
    sups = np.array([r[1] for r in rows])
    if np.any(sups <= 0):
        raise ValueError("upper envelope vanishes on a shell")
    slope, intercept, r2 = loglog_fit(mids, sups)
    if not (0.0 < slope < s + 0.05):
        raise ValueError(f"decay exponent {slope:.3f} outside (0, s + 0.05)")
    return float(slope), float(math.exp(intercept)), float(r2)


def lower_growth_fit(u: GridFunction, domain, h1: float, node_mask=None,
                     ratio: float = 1.25, g_min: float = None):
    """Fit inf-shell u against the vertical gap on (0, h1): growth exponent.

    Returns (rho_fit, C_low, r_squared). A vanishing shell infimum signals
    the trivial solution and raises.
    """
    g = u.grid
    pts = g.points()
    gap = (pts[:, -1] - domain.phi(pts[:, :-1])).reshape(g.shape)
    mask = gap > 0
    if node_mask is not None:
        mask = mask & node_mask
    d = gap[mask]
    v = u.values[mask]
    if g_min is None:
        g_min = g.h
    rows = _shell_envelope(d, v, g_min, h1, ratio, "inf")
    if len(rows) < 6:
        raise ValueError("insufficient shells for the growth fit")
    mids = np.array([r[0] for r in rows])
    infs = np.array([r[1] for r in rows])
    if np.any(infs <= 0):
        raise ValueError("lower envelope vanishes on a shell: trivial solution?")
    slope, intercept, r2 = loglog_fit(mids, infs)
    return float(slope), float(math.exp(intercept)), float(r2)


# ---------------------------------------------------------------------------
# Harnack chains
# ---------------------------------------------------------------------------


def chain_admissible(beta: float, h1: float, h2: float) -> bool:
    """Terminal-index existence: the log-bracket has length > 1."""
    lt = math.log1p(math.tan(beta))
    return math.log(h2 / (1.0 + math.sin(beta))) / lt - math.log(h1) / lt > 1.0


@dataclass
class HarnackChain:
    beta: float
    x0N: float
    h1: float
    h2: float
    dimension: int
    k0: int
    radii: np.ndarray
    centers: np.ndarray
    ratios: np.ndarray = None

    @property
    def bracket(self) -> tuple:
        lt = math.log1p(math.tan(self.beta))
        lo = math.log(self.h1 / self.x0N) / lt
        hi = math.log(self.h2 / ((1.0 + math.sin(self.beta)) * self.x0N)) / lt
        return lo, hi

    @property
    def log_envelope(self) -> tuple:
        """(mu1, nu1, mu2, nu2) with mu_i - nu_i log(x0N) bracketing k0."""
        lt = math.log1p(math.tan(self.beta))
        mu1 = math.log(self.h1) / lt
        mu2 = math.log(self.h2 / (1.0 + math.sin(self.beta))) / lt
        nu = 1.0 / lt
        return mu1, nu, mu2, nu

    def balls_inside_cone(self, n_samples: int = 64, tol: float = 1e-9) -> bool:
        """Boundary samples of every ball stay in the cone (tangency allowed)."""
        tanb = math.tan(self.beta)
        for r, c in zip(self.radii, self.centers):
            if self.dimension == 1:
                pts = np.array([[c[-1] - r], [c[-1] + r]])
                lat = np.zeros(2)
                height = pts[:, 0]
            else:
                ang = np.linspace(0.0, 2 * math.pi, n_samples, endpoint=False)
                lat = np.abs(c[0] + r * np.cos(ang))
                height = c[-1] + r * np.sin(ang)
            if self.dimension == 1:
                if np.any(height < -tol):
                    return False
            elif np.any(lat > tanb * height + tol * (1 + np.abs(height))):
                return False
        return True


def build_chain(x0N: float, beta: float, h1: float, h2: float,
                dimension: int = 2) -> HarnackChain:
    """Build the chain with closed-form radii and centers; scan for k0.

    The terminal index is found by direct scan of the two inequalities and
    cross-checked against the closed-form bracket.
    """
    if not (0.0 < beta < math.pi / 4):
        raise ValueError("chain aperture must lie in (0, pi/4)")
    if not (0.0 < x0N < h1):
        raise ValueError("start height must lie in (0, h1)")
    if not chain_admissible(beta, h1, h2):
        raise ValueError("inadmissible (beta, h1, h2): the index bracket is shorter than 1")

    growth = 1.0 + math.tan(beta)
    k = 0
    while True:
        height = x0N * growth**k
        if height > h1:
            if not (x0N * (1.0 + math.sin(beta)) * growth**k < h2):
                raise ValueError("scan passed h1 but violated the h2 cap")
            k0 = k
            break
        k += 1
        if k > 10000:
            raise ValueError("terminal index scan did not terminate")

    ks = np.arange(k0 + 1)
    radii = x0N * math.sin(beta) * growth**ks
    heights = x0N * growth**ks
    centers = np.zeros((k0 + 1, dimension))
    centers[:, -1] = heights

    chain = HarnackChain(beta=beta, x0N=x0N, h1=h1, h2=h2, dimension=dimension,
                         k0=int(k0), radii=radii, centers=centers)
    lo, hi = chain.bracket
    if not (lo <= k0 + 1e-9 and k0 <= hi + 1e-9):
        raise AssertionError(f"terminal index {k0} escaped its bracket [{lo:.3f}, {hi:.3f}]")
    if not chain.balls_inside_cone():
        raise AssertionError("a chain ball left the cone")
    return chain


def verify_chain_harnack(v, chain: HarnackChain, op=None, harmonic_tol: float = 1e-6):
    """Max ratio v(x_{k+1}) / v(x_k) along the chain.

    `v` is a callable on points or a GridFunction (interpolated). With `op`
    given and v grid-backed, discrete harmonicity is verified on the chain
    balls first (residual below `harmonic_tol`).
    """
    if isinstance(v, GridFunction):
        if op is not None:
            res = op.apply_fast(v)
            pts = v.grid.points()
            for r, c in zip(chain.radii[1:], chain.centers[1:]):
                inside = np.linalg.norm(pts - c, axis=1) < r
                ball_mask = inside.reshape(v.grid.shape) & op.interior
                if np.any(ball_mask):
                    worst = float(np.max(np.abs(res[ball_mask])))
                    if worst > harmonic_tol:
                        raise ValueError(
                            f"field is not discrete-harmonic on a chain ball "
                            f"(residual {worst:.2e})"
                        )
        values = np.asarray(v.interp(chain.centers), dtype=float)
    else:
        values = np.asarray(v(chain.centers), dtype=float)
    if np.any(values <= 0):
        raise ValueError("chain evaluation hit a nonpositive value")
    ratios = values[1:] / values[:-1]
    chain.ratios = ratios
    return float(np.max(ratios))
