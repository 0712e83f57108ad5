"""Univariate building blocks: Leja nodes, Lagrange and Legendre evaluation.

The node family is a single nested Leja sequence on [-1, 1] started at 0.
Lagrange evaluation uses the barycentric form internally; Legendre
polynomials are normalized so that (1/2) int_{-1}^{1} L_n^2 dx = 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .multiindex import MultiIndex

#: largest supported Legendre order (desk-scale index sets stay far below)
MAX_LEGENDRE_ORDER = 200

DEFAULT_GRID_RESOLUTION = 100_000


@dataclass(frozen=True)
class LejaSequence:
    """Greedily constructed Leja points with their candidate-grid size."""

    points: np.ndarray
    grid_resolution: int

    def __len__(self) -> int:
        return len(self.points)

    def __getitem__(self, k: int) -> float:
        return float(self.points[k])

    def prefix(self, n: int) -> "LejaSequence":
        if n > len(self.points):
            raise ValueError(f"only {len(self.points)} points available, requested {n}")
        return LejaSequence(self.points[:n], self.grid_resolution)


def leja_points(n: int, grid_resolution: int = DEFAULT_GRID_RESOLUTION) -> LejaSequence:
    """First ``n`` Leja points on [-1, 1].

    chi_0 = 0 by convention; each subsequent point maximizes
    prod_j |x - chi_j| over a uniform candidate grid, ties broken toward
    the smaller x.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if grid_resolution < 10 * n:
        raise ValueError(f"grid_resolution must be >= 10*n = {10 * n}")
    grid = np.linspace(-1.0, 1.0, grid_resolution)
    pts = np.empty(n)
    pts[0] = 0.0
    with np.errstate(divide="ignore"):
        logprod = np.log(np.abs(grid - 0.0))
    for k in range(1, n):
        i = int(np.argmax(logprod))  # argmax returns the first (smallest x) maximizer
        pts[k] = grid[i]
        with np.errstate(divide="ignore"):
            logprod += np.log(np.abs(grid - pts[k]))
    return LejaSequence(pts, grid_resolution)


def _check_distinct(nodes: np.ndarray) -> None:
    if len(np.unique(nodes)) != len(nodes):
        raise ValueError("interpolation nodes must be distinct")


def barycentric_weights(nodes: Sequence[float]) -> np.ndarray:
    """w_k = 1 / prod_{i != k} (chi_k - chi_i)."""
    nodes = np.asarray(nodes, dtype=float)
    _check_distinct(nodes)
    diff = nodes[:, None] - nodes[None, :]
    np.fill_diagonal(diff, 1.0)
    return 1.0 / diff.prod(axis=1)


def lagrange_basis(nodes: Sequence[float], k: int, x: float) -> float:
    """k-th Lagrange basis polynomial at x (product form; 1 for a single node)."""
    nodes = np.asarray(nodes, dtype=float)
    _check_distinct(nodes)
    if not 0 <= k < len(nodes):
        raise ValueError(f"basis index {k} out of range for {len(nodes)} nodes")
    others = np.delete(nodes, k)
    return float(np.prod((x - others) / (nodes[k] - others)))


def lagrange_all(nodes: Sequence[float], x) -> np.ndarray:
    """All Lagrange basis values at x via the barycentric formula.

    ``x`` may be a scalar or a 1-d array; the result has shape
    ``x.shape + (len(nodes),)``.  Exact node hits return unit vectors.
    """
    nodes = np.asarray(nodes, dtype=float)
    w = barycentric_weights(nodes)
    x_arr = np.atleast_1d(np.asarray(x, dtype=float))
    diff = x_arr[:, None] - nodes[None, :]
    exact = diff == 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = w[None, :] / diff
        vals = terms / terms.sum(axis=1, keepdims=True)
    hit_rows = exact.any(axis=1)
    if hit_rows.any():
        vals[hit_rows] = exact[hit_rows].astype(float)
    return vals[0] if np.isscalar(x) or np.ndim(x) == 0 else vals


def lebesgue_constant(nodes: Sequence[float], grid_resolution: int = 20_000) -> float:
    """Grid maximum of sum_k |l_k(x)| on [-1, 1] (a lower bound on the true constant)."""
    grid = np.linspace(-1.0, 1.0, grid_resolution)
    vals = lagrange_all(nodes, grid)
    return float(np.abs(vals).sum(axis=1).max())


def legendre(n: int, x):
    """Normalized Legendre polynomial L_n(x) = sqrt(2n+1) P_n(x).

    x may be scalar or ndarray.  Values outside [-1, 1] are permitted for
    internal use but the normalization statement only applies on [-1, 1].
    """
    if n < 0:
        raise ValueError("order must be >= 0")
    if n > MAX_LEGENDRE_ORDER:
        raise ValueError(f"Legendre order capped at {MAX_LEGENDRE_ORDER}")
    x = np.asarray(x, dtype=float)
    p_prev = np.ones_like(x)
    if n == 0:
        out = p_prev
    else:
        p = x.copy()
        for k in range(1, n):
            p, p_prev = ((2 * k + 1) * x * p - k * p_prev) / (k + 1), p
        out = p
    out = np.sqrt(2 * n + 1) * out
    return float(out) if out.ndim == 0 else out


def legendre_tensor(nu: MultiIndex, y) -> float:
    """L_nu(y) = prod_{j in supp nu} L_{nu_j}(y_j); empty product is 1.

    ``y`` is either a mapping from 1-based dimension to value or a sequence
    indexed by dimension-1.  A missing coordinate for an active dimension
    is an error.
    """
    out = 1.0
    for dim, order in nu:
        if isinstance(y, Mapping):
            if dim not in y:
                raise KeyError(f"no coordinate for active dimension {dim}")
            yj = y[dim]
        else:
            if dim > len(y):
                raise KeyError(f"no coordinate for active dimension {dim}")
            yj = y[dim - 1]
        out *= legendre(order, yj)
    return out
