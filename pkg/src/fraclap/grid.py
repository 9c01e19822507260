"""Uniform tensor grids over a bounding box, with exterior Dirichlet data.

A grid is a truncation window into an unbounded domain: node values inside
the box are stored, everything outside the box is described by an exterior
rule. The rule provides (a) point values for the padding band a stencil can
reach, and (b) a single far-field constant used by the operator's analytic
tail. Boundary nodes (x_N = phi(x') exactly) classify as exterior, so the
discrete Dirichlet data of an open domain is unambiguous.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "UniformGrid",
    "GridFunction",
    "ZeroExterior",
    "ConstantExterior",
    "CallableExterior",
    "EpigraphTruncationExterior",
    "NodePartition",
    "classify",
]

MAX_NODES = 1 << 24


@dataclass(frozen=True)
class UniformGrid:
    """Isotropic tensor-product grid: nodes = origin + h * multi-index."""

    origin: tuple
    h: float
    counts: tuple

    def __post_init__(self):
        if self.h <= 0:
            raise ValueError("grid spacing must be positive")
        if any(c < 2 for c in self.counts):
            raise ValueError("need at least 2 nodes per axis")
        if int(np.prod(self.counts)) > MAX_NODES:
            raise ValueError(f"grid exceeds the {MAX_NODES} node cap")

    @classmethod
    def from_box(cls, lo, hi, h: float) -> "UniformGrid":
        """Grid covering [lo, hi] with spacing h; box edges land on nodes."""
        lo = np.atleast_1d(np.asarray(lo, dtype=float))
        hi = np.atleast_1d(np.asarray(hi, dtype=float))
        counts = []
        for a, b in zip(lo, hi):
            n = int(round((b - a) / h)) + 1
            if abs(a + (n - 1) * h - b) > 1e-9 * max(1.0, abs(b)):
                raise ValueError("box is not an integer multiple of h")
            counts.append(n)
        return cls(origin=tuple(lo), h=float(h), counts=tuple(counts))

    @property
    def dimension(self) -> int:
        return len(self.counts)

    @property
    def shape(self) -> tuple:
        return tuple(self.counts)

    @property
    def n_nodes(self) -> int:
        return int(np.prod(self.counts))

    @property
    def box(self) -> tuple:
        lo = np.asarray(self.origin)
        hi = lo + self.h * (np.asarray(self.counts) - 1)
        return tuple(lo), tuple(hi)

    def axis(self, i: int) -> np.ndarray:
        return self.origin[i] + self.h * np.arange(self.counts[i])

    def axes(self):
        return [self.axis(i) for i in range(self.dimension)]

    def points(self) -> np.ndarray:
        """All node coordinates, shape (n_nodes, N), C-order."""
        mesh = np.meshgrid(*self.axes(), indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)

    def index_of(self, x) -> tuple:
        """Multi-index of the node at x (must land on a node)."""
        x = np.asarray(x, dtype=float)
        idx = (x - np.asarray(self.origin)) / self.h
        ridx = np.rint(idx)
        if np.max(np.abs(idx - ridx)) > 1e-8:
            raise ValueError(f"{x} is not a grid node")
        return tuple(int(i) for i in ridx)


@dataclass(frozen=True)
class NodePartition:
    """Interior/exterior split of the grid nodes (boolean masks)."""

    interior: np.ndarray
    exterior: np.ndarray

    @property
    def interior_indices(self) -> np.ndarray:
        return np.argwhere(self.interior)

    @property
    def exterior_indices(self) -> np.ndarray:
        return np.argwhere(self.exterior)

    @property
    def n_interior(self) -> int:
        return int(np.count_nonzero(self.interior))


def classify(grid: UniformGrid, domain) -> NodePartition:
    """Partition grid nodes into interior (strict membership) and exterior."""
    if grid.dimension != domain.dimension:
        raise ValueError(
            f"grid dimension {grid.dimension} != domain dimension {domain.dimension}"
        )
    inside = domain.contains(grid.points()).reshape(grid.shape)
    return NodePartition(interior=inside, exterior=~inside)


# ---------------------------------------------------------------------------
# exterior rules
# ---------------------------------------------------------------------------


class ZeroExterior:
    """u = 0 outside the box; far field 0."""

    far_field = 0.0

    def pad(self, values: np.ndarray, grid: UniformGrid, width: int) -> np.ndarray:
        return np.pad(values, width, mode="constant", constant_values=0.0)


@dataclass(frozen=True)
class ConstantExterior:
    """u = c outside the box; far field c."""

    c: float

    @property
    def far_field(self) -> float:
        return self.c

    def pad(self, values: np.ndarray, grid: UniformGrid, width: int) -> np.ndarray:
        return np.pad(values, width, mode="constant", constant_values=self.c)


@dataclass(frozen=True)
class CallableExterior:
    """u given by `func(points) -> values` outside the box.

    `far_field` must be supplied explicitly whenever the operator carries a
    positive tail weight; there is no way to infer it from the callable.
    """

    func: object
    far_field: float = None
    tag: str = "callable"

    def pad(self, values: np.ndarray, grid: UniformGrid, width: int) -> np.ndarray:
        padded = np.pad(values, width, mode="constant", constant_values=0.0)
        axes = [
            grid.origin[i] + grid.h * (np.arange(-width, grid.counts[i] + width))
            for i in range(grid.dimension)
        ]
        mesh = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([m.ravel() for m in mesh], axis=-1)
        outside = np.zeros(padded.shape, dtype=bool)
        outside[...] = True
        core = tuple(slice(width, width + n) for n in grid.counts)
        outside[core] = False
        vals = np.asarray(self.func(pts[outside.ravel()]), dtype=float)
        out = padded.copy()
        out[outside] = vals
        return out


@dataclass(frozen=True)
class EpigraphTruncationExterior:
    """Truncation model for epigraph scenarios.

    Horizontal directions replicate the box edge column (the best available
    guess for how the boundary layer continues), the band above the box top
    carries the deep-field constant `top_value`, and the band below the box
    carries `bottom_value` (0 under the graph).

    When `domain` is set, the analytic tail is split by direction: the
    kernel mass landing below the graph's tangent plane carries
    `bottom_value`, the rest carries `top_value`. This restores the deficit
    that keeps solutions strictly below their deep-field limit (exact for
    half-spaces, tangent-plane approximation otherwise).
    """

    top_value: float
    bottom_value: float = 0.0
    domain: object = None

    @property
    def far_field(self) -> float:
        return self.top_value

    def pad(self, values: np.ndarray, grid: UniformGrid, width: int) -> np.ndarray:
        N = grid.dimension
        # replicate laterally first, then stamp the vertical bands
        lateral = [(width, width)] * (N - 1) + [(0, 0)]
        out = np.pad(values, lateral, mode="edge")
        vertical = [(0, 0)] * (N - 1) + [(width, width)]
        out = np.pad(out, vertical, mode="constant", constant_values=0.0)
        bottom = tuple([slice(None)] * (N - 1) + [slice(0, width)])
        top = tuple([slice(None)] * (N - 1) + [slice(out.shape[-1] - width, None)])
        out[bottom] = self.bottom_value
        out[top] = self.top_value
        return out

    def tail_mean(self, points: np.ndarray, radius: float, s: float) -> np.ndarray:
        """Direction-weighted far value per node (used by the operator tail)."""
        if self.domain is None:
            return np.full(len(points), self.top_value)
        from .operator import below_tail_mass, truncation_tail  # deferred: avoids cycle

        pts = np.atleast_2d(np.asarray(points, dtype=float))
        N = pts.shape[1]
        gap = pts[:, -1] - self.domain.phi(pts[:, :-1])
        below = below_tail_mass(np.maximum(gap, 0.0), radius, N, s)
        c_tail = below_tail_mass(0.0, radius, N, s) * 2.0  # = full tail mass
        frac_below = np.clip(below / c_tail, 0.0, 1.0)
        return self.top_value * (1.0 - frac_below) + self.bottom_value * frac_below


@dataclass
class GridFunction:
    """Real samples on a grid plus an exterior rule beyond the box."""

    grid: UniformGrid
    values: np.ndarray
    exterior: object = field(default_factory=ZeroExterior)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.grid.shape:
            raise ValueError("values shape does not match grid shape")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("grid function carries non-finite values")

    @classmethod
    def from_callable(cls, grid: UniformGrid, func, exterior=None) -> "GridFunction":
        vals = np.asarray(func(grid.points()), dtype=float).reshape(grid.shape)
        return cls(grid, vals, exterior if exterior is not None else ZeroExterior())

    def copy_with(self, values: np.ndarray) -> "GridFunction":
        return GridFunction(self.grid, values, self.exterior)

    def padded(self, width: int) -> np.ndarray:
        return self.exterior.pad(self.values, self.grid, width)

    def interp(self, x) -> np.ndarray:
        """Multilinear interpolation at points inside the box."""
        pts = np.atleast_2d(np.asarray(x, dtype=float))
        g = self.grid
        rel = (pts - np.asarray(g.origin)) / g.h
        lo = np.floor(rel).astype(int)
        lo = np.clip(lo, 0, np.asarray(g.counts) - 2)
        frac = rel - lo
        out = np.zeros(len(pts))
        for corner in range(1 << g.dimension):
            w = np.ones(len(pts))
            idx = []
            for d in range(g.dimension):
                bit = (corner >> d) & 1
                w = w * (frac[:, d] if bit else 1.0 - frac[:, d])
                idx.append(lo[:, d] + bit)
            out += w * self.values[tuple(idx)]
        return out if out.size > 1 else float(out[0])
