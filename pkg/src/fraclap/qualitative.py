"""Executable checks of the qualitative theory on computed solutions.

Each check is a pure function of (solution, domain, parameters) returning a
dictionary of metrics; the scenario runner wraps them into pass/fail or
report-only blocks. Checks only assert on scenarios satisfying their
hypotheses (validated bistable nonlinearity, Lipschitz epigraph, direction
inside the admissible cone); outside those hypotheses they are run in
report-only mode by the caller.

Conventions. The deep-field value is normalized to mu = 1 where a check
needs an absolute scale (uniform convergence, its depth inequality, and the
near-boundary supremum bounds). Distances to artificial truncation faces
are excluded by small node margins: truncation noise is not evidence
against a theorem. Reflections across horizontal planes are evaluated only
at node-exact levels, so sign statements are never polluted by
interpolation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import Ball, CoerciveEpigraph, Cone, HalfSpace, LipschitzEpigraph, reflect
from .grid import CallableExterior, GridFunction, UniformGrid, ZeroExterior, classify
from .operator import assemble
from .solvers import NonlinearitySpec, SolverError, solve_linear
from .util import rng_for

__all__ = [
    "ShellTable",
    "MovingPlanesReport",
    "WitnessPreconditionError",
    "truncation_margin_mask",
    "build_shell_table",
    "check_upper_bound",
    "check_uniform_convergence",
    "check_directional_monotonicity",
    "check_1d_symmetry",
    "check_uniqueness",
    "moving_planes_scan",
    "sliding_check",
    "max_principle_witness",
    "generate_witness",
    "s_normal_derivative",
    "unit_ball_torsion_max",
]


class WitnessPreconditionError(ValueError):
    """The supplied field is not a valid witness (input error, not a theorem
    violation)."""


# ---------------------------------------------------------------------------
# masks and shells
# ---------------------------------------------------------------------------


def truncation_margin_mask(grid: UniformGrid, domain, cells: int) -> np.ndarray:
    """True at nodes at least `cells` away from every artificial box face.

    For epigraphs the lateral and top faces are artificial; the bottom face
    is genuine when the graph meets it. Balls fit inside the box, so nothing
    is excluded; cones are truncated on all faces.
    """
    N = grid.dimension
    mask = np.ones(grid.shape, dtype=bool)

    def exclude(axis, side):
        idx = np.arange(grid.counts[axis])
        band = idx < cells if side == "lo" else idx >= grid.counts[axis] - cells
        sl = [None] * N
        sl[axis] = slice(None)
        nonlocal mask
        mask = mask & ~band[tuple(sl)]

    if isinstance(domain, Ball):
        return mask
    if isinstance(domain, Cone):
        for ax in range(N):
            exclude(ax, "lo")
            exclude(ax, "hi")
        return mask
    # epigraph-like: lateral + top; bottom only if the graph stays above it
    for ax in range(N - 1):
        exclude(ax, "lo")
        exclude(ax, "hi")
    exclude(N - 1, "hi")
    pts = grid.points().reshape(grid.shape + (N,))
    bottom = tuple([slice(None)] * (N - 1) + [0])
    bottom_pts = pts[bottom].reshape(-1, N)
    if np.all(domain.contains(bottom_pts)):
        exclude(N - 1, "lo")
    return mask


@dataclass
class ShellTable:
    """inf/sup of a field over geometric distance shells [d, ratio d)."""

    ratio: float
    rows: list  # (d_lo, d_hi, inf, sup, count)

    def infima(self):
        return np.array([r[2] for r in self.rows])

    def suprema(self):
        return np.array([r[3] for r in self.rows])

    def edges(self):
        return np.array([r[0] for r in self.rows])

    def monotone_infima(self, tol: float = 1e-6) -> bool:
        inf = self.infima()
        return bool(np.all(np.diff(inf) >= -tol))


def build_shell_table(u: GridFunction, domain, node_mask=None, d_min: float = None,
                      d_max: float = None, ratio: float = 1.25) -> ShellTable:
    g = u.grid
    pts = g.points()
    lo, _ = domain.dist_bounds(pts)
    dist = lo.reshape(g.shape)
    mask = dist > 0
    if node_mask is not None:
        mask &= node_mask
    d = dist[mask]
    v = u.values[mask]
    if d_min is None:
        d_min = g.h
    if d_max is None:
        d_max = float(np.max(d)) * (1 + 1e-12)
    rows = []
    edge = d_min
    while edge < d_max:
        sel = (d >= edge) & (d < edge * ratio)
        if np.any(sel):
            rows.append((float(edge), float(edge * ratio), float(np.min(v[sel])),
                         float(np.max(v[sel])), int(sel.sum())))
        edge *= ratio
    return ShellTable(ratio=ratio, rows=rows)


# ---------------------------------------------------------------------------
# bounds and convergence
# ---------------------------------------------------------------------------


def check_upper_bound(u: GridFunction, mu: float, domain, margin_cells: int = 2,
                      required_margin: float = 0.0) -> dict:
    """Margin of u below its deep-field cap away from truncation faces."""
    mask = truncation_margin_mask(u.grid, domain, margin_cells)
    interior = classify(u.grid, domain).interior
    sel = mask & interior
    max_u = float(np.max(u.values[sel]))
    margin = mu - max_u
    violations = int(np.count_nonzero(u.values[sel] > mu))
    return {
        "max_u": max_u,
        "margin": margin,
        "violating_nodes": violations,
        "passed": bool(margin > required_margin),
    }


_torsion_cache = {}


def unit_ball_torsion_max(N: int, s: float, h: float = None) -> float:
    """Max of the unit-ball torsion solution, computed by a linear solve."""
    key = (N, float(s))
    if key in _torsion_cache:
        return _torsion_cache[key]
    if h is None:
        h = 2 / 256 if N == 1 else 2 / 64
    g = UniformGrid.from_box([-1.0] * N, [1.0] * N, h)
    ball = Ball(dimension=N, center=tuple(0.0 for _ in range(N)), radius=1.0)
    # the window must cover the ball's diameter: the tail model is exact
    # only where the true data equals the far-field constant (0 here)
    op = assemble(g, ball, s, int(round(2.0 / h)))
    u, _ = solve_linear(op, 1.0, ZeroExterior())
    val = float(np.max(u.values))
    _torsion_cache[key] = val
    return val


def check_uniform_convergence(u: GridFunction, domain, s: float, f: NonlinearitySpec,
                              eps1: float = 0.1, margin_cells: int = 2,
                              depth_samples: int = 10) -> dict:
    """Shell table, threshold depth, and the depth inequality of the theory.

    Requires the deep-field normalization mu = 1. Reports:
      * the shell table with its monotone-infima flag;
      * the smallest depth threshold with shell infimum above eps1;
      * for sample points y at increasing depth, the inequality
        C1 * min f on [eps1, (1+eps) u(y)]  <=  (dist(y) - R0)^{-2s},
        with C1 the unit-ball torsion maximum;
      * sup of u over near-boundary slabs of height 0.5, 1, 2.
    """
    if abs(f.mu - 1.0) > 1e-12:
        raise ValueError("uniform-convergence check expects mu normalized to 1")
    g = u.grid
    mask = truncation_margin_mask(g, domain, margin_cells)
    interior = classify(g, domain).interior
    table = build_shell_table(u, domain, node_mask=mask & interior)

    R0 = None
    for (d_lo, _, inf_v, _, _) in table.rows:
        if inf_v > eps1:
            R0 = d_lo
            break
    trivial = R0 is None

    out = {
        "shells": table,
        "monotone_infima": table.monotone_infima(),
        "eps1": eps1,
        "R0": R0,
        "deepest_inf": float(table.infima()[-1]) if table.rows else None,
        "trivial": trivial,
    }
    if trivial:
        raise SolverError("all shell infima below eps1: trivial solution")

    # depth inequality at sample points past R0
    C1 = unit_ball_torsion_max(g.dimension, s)
    pts = g.points()
    lo, _ = domain.dist_bounds(pts)
    dist = lo.reshape(g.shape)
    sel = (dist > R0 + 2 * g.h) & mask & interior
    idxs = np.argwhere(sel)
    checks = []
    if len(idxs) > 0:
        depths = dist[sel]
        order = np.argsort(depths)
        pick = order[np.linspace(0, len(order) - 1, min(depth_samples, len(order))).astype(int)]
        flat = idxs[pick]
        t_grid = np.linspace(0.0, 1.0, 4001)
        for ix in flat:
            ix = tuple(ix)
            uy = float(u.values[ix])
            dy = float(dist[ix])
            if uy >= 1.0 or uy <= eps1:
                continue
            eps = 0.5 * (1.0 / uy - 1.0)
            hi = (1.0 + eps) * uy
            band = t_grid[(t_grid >= eps1) & (t_grid <= hi)]
            delta = float(np.min(f(band)))
            rhs = (dy - R0) ** (-2.0 * s)
            checks.append({"depth": dy, "u": uy, "delta": delta,
                           "lhs": C1 * delta, "rhs": rhs,
                           "ok": bool(C1 * delta <= rhs)})
    out["C1"] = C1
    out["depth_inequality"] = checks
    out["depth_inequality_ok"] = bool(all(c["ok"] for c in checks)) if checks else None

    # near-boundary slabs stay strictly below 1
    slab_sups = {}
    gap = (pts[:, -1] - domain.phi(pts[:, :-1])).reshape(g.shape)
    for hh in (0.5, 1.0, 2.0):
        slab = (gap > 0) & (gap < hh) & interior & mask
        slab_sups[str(hh)] = float(np.max(u.values[slab])) if np.any(slab) else None
    out["slab_sups"] = slab_sups
    out["slabs_below_one"] = bool(all(v is None or v < 1.0 for v in slab_sups.values()))
    return out


# ---------------------------------------------------------------------------
# monotonicity and symmetry
# ---------------------------------------------------------------------------


def _integer_direction(a, max_mult: int = 8):
    """Smallest integer offset (q*a, q) aligned with the direction (a, 1)."""
    a = np.atleast_1d(np.asarray(a, dtype=float))
    if a.size == 0:
        return np.zeros(0, dtype=int), 1
    for q in range(1, max_mult + 1):
        qa = q * a
        if np.max(np.abs(qa - np.rint(qa))) < 1e-9:
            return np.rint(qa).astype(int), q
    raise ValueError("direction is not grid-aligned; use components with small denominators")


def check_directional_monotonicity(u: GridFunction, domain, a=(), K: float = None,
                                   tol: float = 1e-8) -> dict:
    """Min difference of u along the upward direction (a, 1).

    Gate: sum a_i^2 < K^{-2} (any a for K = 0). The direction is snapped to
    the smallest aligned integer node offset, so differences are exact node
    pairs with no interpolation.
    """
    g = u.grid
    N = g.dimension
    a = np.atleast_1d(np.asarray(a, dtype=float)) if len(np.atleast_1d(a)) else np.zeros(N - 1)
    if K is None:
        K = getattr(domain, "lipschitz", 0.0)
    gate = math.inf if K == 0 else K ** (-2.0)
    if float(np.sum(a * a)) >= gate:
        raise ValueError("direction violates the cone condition: sum a_i^2 >= K^{-2}")

    m_prime, q = _integer_direction(a)
    offset = tuple(int(v) for v in m_prime) + (q,)
    interior = classify(g, domain).interior

    src = tuple(slice(0, n - abs(k)) if k >= 0 else slice(abs(k), n)
                for k, n in zip(offset, g.counts))
    dst = tuple(slice(abs(k), n) if k >= 0 else slice(0, n - abs(k))
                for k, n in zip(offset, g.counts))
    both = interior[src] & interior[dst]
    if not np.any(both):
        raise ValueError("no interior node pairs along this direction")
    diffs = (u.values[dst] - u.values[src])[both]
    return {
        "offset_nodes": offset,
        "min_difference": float(np.min(diffs)),
        "mean_difference": float(np.mean(diffs)),
        "pairs": int(both.sum()),
        "passed": bool(np.min(diffs) > -tol),
    }


def check_1d_symmetry(u: GridFunction, domain, lateral_margin_cells: int = 5,
                      tol: float = 1e-3) -> dict:
    """Max over heights of the lateral variation of u (half-space scenario)."""
    g = u.grid
    N = g.dimension
    if N < 2:
        raise ValueError("symmetry check needs at least 2 dimensions")
    interior = classify(g, domain).interior
    sl = tuple(slice(lateral_margin_cells, n - lateral_margin_cells)
               for n in g.counts[:-1]) + (slice(None),)
    vals = u.values[sl]
    mask = interior[sl]
    lateral_axes = tuple(range(N - 1))
    full_rows = np.all(mask, axis=lateral_axes)
    if not np.any(full_rows):
        raise ValueError("no fully interior rows away from the lateral faces")
    var = np.max(vals, axis=lateral_axes) - np.min(vals, axis=lateral_axes)
    cross = float(np.max(var[full_rows]))
    return {
        "cross_variation": cross,
        "rows": int(np.count_nonzero(full_rows)),
        "passed": bool(cross < tol),
    }


def check_uniqueness(solutions, tol: float = 1e-7) -> dict:
    """Max pairwise sup-discrepancy between converged solutions."""
    if len(solutions) < 2:
        raise ValueError("need at least two converged solutions")
    worst = 0.0
    for i in range(len(solutions)):
        for j in range(i + 1, len(solutions)):
            d = float(np.max(np.abs(solutions[i].values - solutions[j].values)))
            worst = max(worst, d)
    return {"max_discrepancy": worst, "runs": len(solutions), "passed": bool(worst < tol)}


# ---------------------------------------------------------------------------
# moving planes and sliding
# ---------------------------------------------------------------------------


@dataclass
class MovingPlanesReport:
    lambdas: list
    minima: list
    cap_sizes: list
    first_violation: float = None

    @property
    def nested(self) -> bool:
        return bool(np.all(np.diff(self.cap_sizes) >= 0))

    @property
    def passed(self) -> bool:
        return self.first_violation is None


def moving_planes_scan(u: GridFunction, domain, lambdas, tol: float = 1e-6) -> MovingPlanesReport:
    """Reflect u across horizontal planes and report min of u(x^l) - u(x).

    Levels snap to half-cell multiples so every reflection is node-exact.
    Caps are the interior nodes strictly below the level; their reflections
    must stay inside the box.
    """
    g = u.grid
    N = g.dimension
    h = g.h
    origin_N = g.origin[-1]
    top = origin_N + h * (g.counts[-1] - 1)
    interior = classify(g, domain).interior
    pts = g.points().reshape(g.shape + (N,))
    xN = pts[..., -1]
    lam0 = float(np.min(domain.phi(g.points()[:, :-1])))

    lam_list, minima, sizes = [], [], []
    first_violation = None
    for lam_raw in lambdas:
        lam = origin_N + round((float(lam_raw) - origin_N) / (h / 2)) * (h / 2)
        if lam <= lam0:
            raise ValueError(f"plane level {lam} at or below the domain's bottom {lam0}")
        if 2 * lam - origin_N > top + 1e-12:
            raise ValueError(f"reflections across {lam} leave the box")
        cap = interior & (xN < lam - 1e-12)
        n_cap = int(np.count_nonzero(cap))
        if n_cap == 0:
            lam_list.append(lam)
            minima.append(math.inf)
            sizes.append(0)
            continue
        # node-exact reflection: index j -> j_ref along the vertical axis
        j = np.arange(g.counts[-1])
        j_ref = np.rint((2 * lam - (origin_N + j * h) - origin_N) / h).astype(int)
        valid = (j_ref >= 0) & (j_ref < g.counts[-1])
        refl = np.full(g.shape, np.nan)
        take = tuple([slice(None)] * (N - 1) + [j[valid]])
        put = tuple([slice(None)] * (N - 1) + [j_ref[valid]])
        refl[take] = u.values[put]
        w = refl - u.values
        m = float(np.nanmin(np.where(cap, w, np.nan)))
        lam_list.append(lam)
        minima.append(m)
        sizes.append(n_cap)
        if m < -tol and first_violation is None:
            first_violation = lam
    return MovingPlanesReport(lambdas=lam_list, minima=minima, cap_sizes=sizes,
                              first_violation=first_violation)


@dataclass(frozen=True)
class _BoxSet:
    """Open box used by the sliding scenario and witness generation."""

    lo: tuple
    hi: tuple

    @property
    def dimension(self) -> int:
        return len(self.lo)

    def contains(self, x) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(x, dtype=float))
        lo = np.asarray(self.lo)
        hi = np.asarray(self.hi)
        return np.all((pts > lo) & (pts < hi), axis=1)


def sliding_check(box_lo, box_hi, h: float, s: float, exterior_func, window: int = None,
                  rhs=0.0, tol: float = 1e-8, pad_cells: int = 4) -> dict:
    """Solve a Dirichlet problem on a box and check vertical monotonicity.

    `exterior_func(points) -> values` prescribes the data outside the open
    box; it must be strictly increasing across the box height and
    non-decreasing in the vertical coordinate (sampled validation). The
    solved field's vertical forward differences must clear -tol.
    """
    box_lo = np.atleast_1d(np.asarray(box_lo, dtype=float))
    box_hi = np.atleast_1d(np.asarray(box_hi, dtype=float))
    N = len(box_lo)
    dom = _BoxSet(tuple(box_lo), tuple(box_hi))

    # ordering validation on sampled triples through the box height
    rng = np.random.default_rng(7)
    xp = rng.uniform(box_lo[:-1] - 1, box_hi[:-1] + 1, size=(64, N - 1)) if N > 1 \
        else np.zeros((64, 0))
    below = np.concatenate([xp, np.full((64, 1), box_lo[-1] - 0.5)], axis=1)
    above = np.concatenate([xp, np.full((64, 1), box_hi[-1] + 0.5)], axis=1)
    lo_vals = np.asarray(exterior_func(below), dtype=float)
    hi_vals = np.asarray(exterior_func(above), dtype=float)
    if not np.all(hi_vals > lo_vals + 1e-12):
        raise ValueError("exterior data is not strictly increasing across the box")
    mid = np.concatenate([xp, np.full((64, 1), 0.5 * (box_lo[-1] + box_hi[-1]))], axis=1)
    mid_vals = np.asarray(exterior_func(mid), dtype=float)
    if not (np.all(mid_vals >= lo_vals - 1e-12) and np.all(hi_vals >= mid_vals - 1e-12)):
        raise ValueError("exterior data is not vertically ordered")

    grid = UniformGrid.from_box(box_lo - pad_cells * h, box_hi + pad_cells * h, h)
    if window is None:
        window = max(4, min(grid.counts))
    ext = CallableExterior(func=exterior_func, far_field=float(np.mean(hi_vals)))
    op = assemble(grid, dom, s, window)
    data = np.asarray(exterior_func(grid.points()), dtype=float).reshape(grid.shape)
    data[op.interior] = 0.0
    carrier = GridFunction(grid, data, ext)
    w, rep = solve_linear(op, rhs, exterior=ext, x0=carrier)

    interior = op.interior
    src = tuple([slice(None)] * (N - 1) + [slice(0, grid.counts[-1] - 1)])
    dst = tuple([slice(None)] * (N - 1) + [slice(1, grid.counts[-1])])
    both = interior[src] & interior[dst]
    diffs = (w.values[dst] - w.values[src])[both]
    return {
        "min_vertical_difference": float(np.min(diffs)),
        "pairs": int(both.sum()),
        "solver_residual": rep.residual,
        "passed": bool(np.min(diffs) > -tol),
        "solution": w,
    }


# ---------------------------------------------------------------------------
# maximum principle witnesses
# ---------------------------------------------------------------------------


def max_principle_witness(op, c_vals: np.ndarray, z: GridFunction, cone: Cone,
                          tol: float = 1e-8) -> dict:
    """Max of a valid witness over the unknown set; the theory predicts <= tol.

    Preconditions (violations raise WitnessPreconditionError, never count as
    theorem violations): c <= 0 on the unknown set; the set's complement
    contains the given cone (no unknown node inside it); the discrete
    inequality (L z - c z)(x) <= tol holds on the unknown set; z <= 0 at
    exterior nodes and beyond.
    """
    D = op.interior
    g = op.grid
    if np.any(c_vals[D] > 0):
        raise WitnessPreconditionError("zero-order coefficient is positive somewhere on D")
    pts = g.points()
    in_cone = cone.contains(pts).reshape(g.shape)
    if np.any(D & in_cone):
        raise WitnessPreconditionError("the exterior cone meets the witness set")
    if np.any(z.values[~D] > tol):
        raise WitnessPreconditionError("witness is positive on exterior data nodes")
    lhs = op.apply_fast(z) - c_vals * z.values
    worst = float(np.max(lhs[D]))
    if worst > 10 * tol * (1 + float(np.max(np.abs(z.values)))):
        raise WitnessPreconditionError(
            f"witness inequality fails on D (max lhs {worst:.2e})"
        )
    return {"max_z": float(np.max(z.values[D])), "passed": bool(np.max(z.values[D]) <= tol)}


def generate_witness(grid: UniformGrid, s: float, window: int, cone: Cone,
                     seed_rng, c_scale: float = 1.0) -> tuple:
    """Random valid witness: solve (L - c) z = -g with g >= 0, data 0.

    Returns (op, c_vals, z). Inverse positivity makes z <= 0, which is what
    the maximum principle predicts; the check is that the prediction holds
    numerically for every generated instance.
    """
    pts = grid.points()
    outside_cone = ~cone.contains(pts).reshape(grid.shape)
    lo, hi = grid.box
    box = _BoxSet(tuple(np.asarray(lo) - grid.h), tuple(np.asarray(hi) + grid.h))
    D = outside_cone & classify(grid, box).interior
    op = assemble(grid, box, s, window, interior_mask=D)

    n = op.partition.n_interior
    g_vals = seed_rng.uniform(0.0, 1.0, size=n)
    if seed_rng.uniform() < 0.5:
        c_int = -c_scale * seed_rng.uniform(0.0, 1.0, size=n)
    else:
        c_int = np.zeros(n)
    c_vals = np.zeros(grid.shape)
    c_vals[D] = c_int

    def matvec(x):
        return op.interior_matvec(x) - c_int * x

    from .solvers import _cg

    x, _, res = _cg(matvec, -g_vals, tol_sup=1e-11)
    vals = np.zeros(grid.shape)
    vals[D] = x
    z = GridFunction(grid, vals, ZeroExterior())
    return op, c_vals, z


# ---------------------------------------------------------------------------
# boundary s-derivative
# ---------------------------------------------------------------------------


def _inner_normal(domain, x0):
    N = domain.dimension
    if isinstance(domain, HalfSpace):
        nu = np.zeros(N)
        nu[-1] = 1.0
        return nu
    phi = domain.phi_spec
    if not hasattr(phi, "slope_at"):
        slope = getattr(phi, "slope", None)
        if slope is None and type(phi).__name__ == "ConstantPhi":
            slope = np.zeros(N - 1)
        if slope is None:
            raise ValueError("boundary is not smooth at this profile; no normal")
        sl = np.asarray(slope, dtype=float)
    else:
        sl = np.atleast_1d(np.asarray(phi.slope_at(np.asarray(x0[:-1])), dtype=float))
    nu = np.concatenate([-sl, [1.0]])
    return nu / np.linalg.norm(nu)


def s_normal_derivative(u: GridFunction, domain, x0, s: float,
                        t_min_cells: int = 4, t_max_cells: int = 32,
                        n_samples: int = 12) -> dict:
    """Boundary derivative of order s along the inner normal at x0.

    Samples u(x0 + t nu) / t^s for t in [t_min_cells h, t_max_cells h], fits
    the first-order model a + b t and returns value = -a with the fit R^2.
    """
    g = u.grid
    h = g.h
    x0 = np.asarray(x0, dtype=float)
    nu = _inner_normal(domain, x0)
    t = np.linspace(t_min_cells * h, t_max_cells * h, n_samples)
    pts = x0[None, :] + t[:, None] * nu[None, :]
    inside = domain.contains(pts)
    lo, hi = g.box
    inbox = np.all((pts >= np.asarray(lo)) & (pts <= np.asarray(hi)), axis=1)
    ok = inside & inbox
    if np.count_nonzero(ok) < 5:
        raise ValueError("fewer than 5 ray samples inside the domain")
    t = t[ok]
    vals = np.asarray(u.interp(pts[ok]), dtype=float)
    y = vals / t**s
    coef = np.polyfit(t, y, 1)  # coef = [b, a] for the model a + b t
    fit = np.polyval(coef, t)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    degenerate = ss_tot <= 1e-14 * len(y) * max(1.0, float(np.mean(y)) ** 2)
    r2 = 1.0 if degenerate else 1.0 - float(np.sum((y - fit) ** 2)) / ss_tot
    return {"value": float(-coef[1]), "slope": float(coef[0]),
            "r_squared": float(r2), "samples": int(len(t))}