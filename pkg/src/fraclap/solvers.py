"""Linear solves, principal eigenpairs, and the semilinear monotone iteration.

The linear Dirichlet problem  Lu = g in Omega, u = data outside  reduces to a
symmetric positive definite system for the interior unknowns (an M-matrix:
positive diagonal, nonpositive couplings), solved matrix-free by conjugate
gradients with a sup-norm residual target.

The semilinear problem  Lu = f(u)  with a bistable-type nonlinearity is
solved by monotone iteration from the supersolution u = mu:

    (A + L I) u^{k+1} = f(u^k) + L u^k + (exterior load at step k),

where L is a Lipschitz constant of f on [0, mu]. Since t -> f(t) + L t is
non-decreasing and (A + L I) is inverse-positive, the iterates decrease
node-wise toward the maximal solution; the decrease is asserted at every
step (a violation indicates an undersized L or an assembly bug).
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .grid import ConstantExterior, EpigraphTruncationExterior, GridFunction, ZeroExterior
from .geometry import Ball, CoerciveEpigraph, HalfSpace, LipschitzEpigraph
from .operator import DiscreteOperator

__all__ = [
    "NonlinearitySpec",
    "cubic_bistable",
    "validate_f",
    "ValidationReport",
    "SolveReport",
    "solve_linear",
    "principal_eigenpair",
    "solve_semilinear",
    "SolverError",
]


class SolverError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# nonlinearities
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NonlinearitySpec:
    """Bistable-type nonlinearity with its certificate parameters.

    The parameters assert: f > 0 on (0, mu) and f <= 0 past mu; f(t) >= delta0*t
    on [0, t0]; f non-increasing on (t1, mu); L bounds |f'| on [0, mu].
    """

    func: object
    mu: float
    t0: float
    delta0: float
    t1: float
    lipschitz: float
    name: str = "f"

    def __post_init__(self):
        if not (0 < self.t0 < self.mu):
            raise ValueError("need 0 < t0 < mu")
        if not (self.t0 < self.t1 < self.mu):
            raise ValueError("need t0 < t1 < mu")
        if self.delta0 <= 0 or self.lipschitz < 0:
            raise ValueError("delta0 > 0 and lipschitz >= 0 required")

    def __call__(self, t):
        return self.func(np.asarray(t, dtype=float))


def cubic_bistable(mu: float = 1.0) -> NonlinearitySpec:
    """The prototype f(t) = t - t^3 (for mu = 1), rescaled to f(mu) = 0."""
    m = float(mu)

    def f(t):
        return t - t**3 / (m * m)

    # f'(t) = 1 - 3 t^2 / mu^2 vanishes at t1 = mu/sqrt(3); |f'| <= 2 on [0, mu]
    return NonlinearitySpec(
        func=f, mu=m, t0=0.5 * m, delta0=0.5, t1=m / math.sqrt(3.0),
        lipschitz=2.0, name="cubic_bistable",
    )


@dataclass
class ValidationReport:
    ok: bool
    violations: list = field(default_factory=list)
    lipschitz_estimate: float = 0.0

    def __bool__(self):
        return self.ok


def validate_f(f: NonlinearitySpec, samples: int = 2000) -> ValidationReport:
    """Check the bistable assumptions on a dense grid of [0, 2 mu].

    The Lipschitz estimate is taken over [0, mu] only: the iteration never
    sees values outside that range, matching the usual redefinition of f
    beyond the solution's sup.
    """
    if samples < 1000:
        raise ValueError("need samples >= 1000")
    mu = f.mu
    t = np.linspace(0.0, 2.0 * mu, samples)
    ft = f(t)
    v = []

    inside = (t > 1e-9 * mu) & (t < mu - 1e-9 * mu)
    bad = inside & (ft <= 0)
    if np.any(bad):
        v.append(("f1", float(t[bad][0]), "f not strictly positive on (0, mu)"))
    beyond = t >= mu
    bad = beyond & (ft > 1e-12)
    if np.any(bad):
        v.append(("f1", float(t[bad][0]), "f positive at t >= mu"))

    low = t <= f.t0
    bad = low & (ft < f.delta0 * t - 1e-12)
    if np.any(bad):
        v.append(("f2", float(t[bad][0]), "f below delta0 * t on [0, t0]"))

    mono = (t > f.t1) & (t < mu)
    idx = np.where(mono)[0]
    if idx.size >= 2:
        d = np.diff(ft[idx])
        if np.any(d > 1e-10):
            j = idx[np.where(d > 1e-10)[0][0]]
            v.append(("f3", float(t[j]), "f increasing inside (t1, mu)"))

    core = t <= mu
    slopes = np.abs(np.diff(ft[core]) / np.diff(t[core]))
    est = float(np.max(slopes)) if slopes.size else 0.0
    if f.lipschitz < est - 1e-9:
        v.append(("lipschitz", float(est), "declared L below finite-difference estimate"))

    return ValidationReport(ok=not v, violations=v, lipschitz_estimate=est)


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------


@dataclass
class SolveReport:
    iterations: int
    residual: float
    converged: bool
    monotone: bool = None
    wall_time: float = 0.0
    method: str = ""


# ---------------------------------------------------------------------------
# conjugate gradients (matrix-free, sup-norm target, warm-startable)
# ---------------------------------------------------------------------------


def _exterior_node_values(grid, exterior) -> np.ndarray:
    """Dirichlet values the rule implies at in-box nodes (full-box array)."""
    from .grid import CallableExterior

    if isinstance(exterior, ConstantExterior):
        return np.full(grid.shape, exterior.c)
    if isinstance(exterior, CallableExterior):
        return np.asarray(exterior.func(grid.points()), dtype=float).reshape(grid.shape)
    return np.zeros(grid.shape)


def _cg(matvec, b, x0=None, tol_sup=1e-10, max_iter=100000, check_every=1000):
    """CG for SPD systems; stops when the true residual sup-norm <= tol_sup.

    The recursive residual drives the iteration; the true residual is only
    recomputed at stopping candidates (and every `check_every` steps), with
    a full restart if the two have drifted apart.
    """
    x = np.zeros_like(b) if x0 is None else x0.astype(float).copy()
    r = b - matvec(x)
    if float(np.max(np.abs(r))) <= tol_sup:
        return x, 0, float(np.max(np.abs(r)))
    p = r.copy()
    rs = float(r @ r)
    it = 0
    while it < max_iter:
        it += 1
        Ap = matvec(p)
        pAp = float(p @ Ap)
        if pAp <= 0.0:  # rounding broke conjugacy; restart from the gradient
            r = b - matvec(x)
            rs = float(r @ r)
            p = r.copy()
            continue
        alpha = rs / pAp
        x += alpha * p
        r -= alpha * Ap
        rs_new = float(r @ r)
        if math.sqrt(rs_new) <= tol_sup or it % check_every == 0:
            r_true = b - matvec(x)
            sup = float(np.max(np.abs(r_true)))
            if sup <= tol_sup:
                return x, it, sup
            r = r_true
            rs = float(r @ r)
            p = r.copy()
            continue
        p = r + (rs_new / rs) * p
        rs = rs_new
    r = b - matvec(x)
    return x, it, float(np.max(np.abs(r)))


def solve_linear(op: DiscreteOperator, rhs, exterior=None, tol: float = 1e-10,
                 max_iter: int = 100000, x0: GridFunction = None,
                 verify: str = "fast") -> tuple:
    """Solve  Lu = rhs  on the interior with Dirichlet exterior data.

    `rhs` is a scalar, an interior-flat vector, or a full-box array read at
    interior nodes. `exterior` is an exterior rule (beyond-box data); values
    at exterior nodes inside the box default to the rule's constant (0 for
    Zero) and can be supplied via a GridFunction `x0`'s exterior nodes.

    Returns (GridFunction, SolveReport); the report's residual is the
    interior sup-norm of rhs - Lu measured with verify="fast" (FFT path,
    identical map up to rounding) or "exact" (direct summation).
    """
    t_start = time.perf_counter()
    grid = op.grid
    interior = op.interior
    n_int = op.partition.n_interior
    if exterior is None:
        exterior = ZeroExterior()

    if np.isscalar(rhs):
        b_int = np.full(n_int, float(rhs))
    else:
        rhs_arr = np.asarray(rhs, dtype=float)
        b_int = rhs_arr[interior] if rhs_arr.shape == grid.shape else rhs_arr.reshape(n_int)

    # exterior node values inside the box
    if x0 is not None:
        base_vals = np.array(x0.values)
    else:
        base_vals = np.zeros(grid.shape)
        base_vals[~interior] = _exterior_node_values(grid, exterior)[~interior]

    carrier = GridFunction(grid, base_vals, exterior)
    load = op.exterior_load(carrier)
    b = b_int + load

    tol_sup = tol * (1.0 + float(np.max(np.abs(b_int))))
    x_start = base_vals[interior] if x0 is not None else None
    x, iters, res_inner = _cg(op.interior_matvec, b, x0=x_start, tol_sup=tol_sup,
                              max_iter=max_iter)

    vals = np.array(base_vals)
    vals[interior] = x
    u = GridFunction(grid, vals, exterior)

    applied = op.apply(u) if verify == "exact" else op.apply_fast(u)
    residual = float(np.max(np.abs(applied[interior] - b_int)))
    converged = residual <= 2.0 * tol_sup
    report = SolveReport(
        iterations=iters, residual=residual, converged=converged,
        wall_time=time.perf_counter() - t_start, method=f"cg/{verify}",
    )
    if not converged:
        raise SolverError(
            f"linear solve did not converge: residual {residual:.3e} > {2 * tol_sup:.3e} "
            f"after {iters} iterations"
        )
    return u, report


def principal_eigenpair(op: DiscreteOperator, tol: float = 1e-8,
                        max_iter: int = 200) -> tuple:
    """Principal Dirichlet eigenpair on a ball by inverse power iteration.

    Returns (lambda1, psi1, SolveReport) with psi1 >= 0,  sup psi1 = 1  and
    ||L psi1 - lambda1 psi1||_inf <= tol.
    """
    if not isinstance(op.domain, Ball):
        raise ValueError("principal eigenpair is defined on a ball domain")
    t_start = time.perf_counter()
    interior = op.interior
    x = np.ones(op.partition.n_interior)
    lam = op.diagonal  # any upper bound works as a first guess
    res = math.inf
    for it in range(1, max_iter + 1):
        # inexact inverse iteration: solve only one digit past the current residual
        inner_tol = max(1e-13, min(0.05 * res, 1e-4))
        y, _, _ = _cg(op.interior_matvec, x, x0=x / lam, tol_sup=inner_tol)
        lam = float(y @ x) / float(y @ y)
        x = y / float(np.max(np.abs(y)))
        res = float(np.max(np.abs(op.interior_matvec(x) - lam * x)))
        if res <= tol:
            break
    else:
        raise SolverError(f"inverse power iteration did not converge: residual {res:.3e}")

    x = np.maximum(x, 0.0)  # inverse-positivity keeps psi1 >= 0; clip FP dust
    x /= float(np.max(x))
    vals = np.zeros(op.grid.shape)
    vals[interior] = x
    psi = GridFunction(op.grid, vals, ZeroExterior())
    report = SolveReport(iterations=it, residual=res, converged=True,
                         wall_time=time.perf_counter() - t_start, method="inverse_power")
    return lam, psi, report


# ---------------------------------------------------------------------------
# semilinear monotone iteration
# ---------------------------------------------------------------------------


def default_exterior_model(domain, f: NonlinearitySpec):
    """Truncation model: deep-field mu above the box, 0 under the graph."""
    if isinstance(domain, (HalfSpace, LipschitzEpigraph, CoerciveEpigraph)):
        return EpigraphTruncationExterior(top_value=f.mu, bottom_value=0.0, domain=domain)
    return ZeroExterior()


def solve_semilinear(op: DiscreteOperator, f: NonlinearitySpec, domain=None,
                     exterior=None, outer_tol: float = 1e-8, linear_tol: float = 1e-10,
                     max_outer: int = 500, max_inner: int = 100000,
                     init=None, enforce_monotone: bool = True,
                     validate: bool = True) -> tuple:
    """Solve Lu = f(u), u = 0 outside the (truncated) domain.

    Monotone iteration from the supersolution u = mu (default init). The
    exterior truncation model is rebuilt from the current iterate each step
    (lagged), which preserves the comparison structure. With
    `enforce_monotone` the node-wise decrease of the iterates is asserted
    each step up to inner-solver noise.

    Returns (GridFunction, SolveReport).
    """
    if validate:
        rep = validate_f(f)
        if not rep.ok:
            raise ValueError(f"nonlinearity fails its assumptions: {rep.violations}")
    t_start = time.perf_counter()
    domain = domain if domain is not None else op.domain
    if exterior is None:
        exterior = default_exterior_model(domain, f)

    grid = op.grid
    interior = op.interior
    L = float(f.lipschitz)
    W = op.W
    core = tuple(slice(W, W + n) for n in grid.counts)
    ubar = op.tail_field(exterior)
    tail_term = op.tail * (ubar[interior] if isinstance(ubar, np.ndarray) else ubar)

    if init is None:
        vals = np.zeros(grid.shape)
        vals[interior] = f.mu
    else:
        vals = np.asarray(init, dtype=float).reshape(grid.shape).copy()
        vals[~interior] = 0.0
    u = vals

    def shifted_matvec(x):
        return op.interior_matvec(x) + L * x

    mono_slack = 10.0 * linear_tol * (1.0 + f.mu)
    monotone_ok = True
    x_prev = u[interior].copy()

    for it in range(1, max_outer + 1):
        gf = GridFunction(grid, u, exterior)
        P_ext = gf.padded(W)
        P_ext[core][interior] = 0.0
        load = op.convolve_fast(P_ext)[interior] + tail_term

        b = f(u[interior]) + L * u[interior] + load
        x, _, _ = _cg(shifted_matvec, b, x0=x_prev,
                      tol_sup=linear_tol * (1.0 + float(np.max(np.abs(b)))),
                      max_iter=max_inner)

        if enforce_monotone:
            rise = float(np.max(x - x_prev))
            if rise > mono_slack:
                raise SolverError(
                    f"monotone iteration increased by {rise:.3e} at step {it}; "
                    "Lipschitz shift too small or assembly bug"
                )

        change = float(np.max(np.abs(x - x_prev)))
        u = np.array(u)
        u[interior] = x
        x_prev = x
        if change < outer_tol:
            break
    else:
        raise SolverError(f"semilinear iteration cap reached (last change {change:.3e})")

    lo, hi = float(np.min(u[interior])), float(np.max(u[interior]))
    if lo < -mono_slack or hi > f.mu + mono_slack:
        raise SolverError(f"iterate left [0, mu]: range [{lo:.3e}, {hi:.3e}]")
    u = np.clip(u, 0.0, f.mu)

    sol = GridFunction(grid, u, exterior)
    res = float(np.max(np.abs(op.apply_fast(sol)[interior] - f(u[interior]))))
    report = SolveReport(iterations=it, residual=res, converged=True,
                         monotone=monotone_ok if enforce_monotone else None,
                         wall_time=time.perf_counter() - t_start,
                         method="monotone" if enforce_monotone else "fixed_point")
    return sol, report
