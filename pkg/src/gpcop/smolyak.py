"""Tensorized Lagrange interpolation and the Smolyak combination operator.

Scalar-valued functions of countably many variables with finite active
support are interpolated on nested Leja grids.  Grid points are identified
with the multi-index mu of node indices (chi_{mu_j})_j, so the telescoping
sum shares one sample table across all tensor terms and the number of
distinct evaluations equals the size of the index set.
"""

from __future__ import annotations

import itertools
from typing import Callable, Dict, List, Mapping

import numpy as np

from .multiindex import DownwardClosedSet, MultiIndex, combination_coefficients
from .univariate import LejaSequence, lagrange_all


class GridPoint:
    """Sparse interpolation node: chi_{mu_j} in dimension j, chi_0 elsewhere."""

    __slots__ = ("index",)

    def __init__(self, index: MultiIndex):
        self.index = index

    def coords(self, nodes: LejaSequence) -> Dict[int, float]:
        return {dim: nodes[k] for dim, k in self.index}

    def coord(self, dim: int, nodes: LejaSequence) -> float:
        return nodes[self.index.order(dim)]

    def __eq__(self, other) -> bool:
        return isinstance(other, GridPoint) and self.index == other.index

    def __hash__(self) -> int:
        return hash(self.index)

    def __repr__(self) -> str:
        return f"GridPoint({self.index.to_line() or '0'})"


def point_coords(mu: MultiIndex, nodes: LejaSequence) -> Dict[int, float]:
    """Coordinates of the grid point of mu over its support (chi_0 elsewhere)."""
    return {dim: nodes[k] for dim, k in mu}


def grid(lam: DownwardClosedSet, nodes: LejaSequence) -> List[GridPoint]:
    """The unisolvent grid {(chi_{nu_j})_j : nu in Lambda}; exactly |Lambda| points."""
    if len(nodes) < 1 + lam.max_degree():
        raise ValueError("node sequence too short for the index set")
    return [GridPoint(nu) for nu in lam]


class _LagrangeCache:
    """Per-evaluation cache of univariate Lagrange values.

    Keyed by (dimension, order); values are arrays of shape
    batch_shape + (order+1,) holding all basis values at y_dim.
    """

    def __init__(self, nodes: LejaSequence, y: Mapping[int, object]):
        self.nodes = nodes
        self.y = y
        self._store: Dict[tuple, np.ndarray] = {}

    def values(self, dim: int, order: int) -> np.ndarray:
        key = (dim, order)
        out = self._store.get(key)
        if out is None:
            if dim not in self.y:
                raise KeyError(f"no coordinate for active dimension {dim}")
            out = lagrange_all(self.nodes.points[: order + 1], self.y[dim])
            self._store[key] = out
        return out


def tensor_interpolate(
    nu: MultiIndex,
    f: Callable[[Mapping[int, float]], float],
    nodes: LejaSequence,
    y: Mapping[int, float],
) -> float:
    """Evaluate the tensor-product interpolant (I_nu f)(y).

    Sums f at all grid points mu <= nu weighted by products of univariate
    Lagrange factors.  The callback receives sparse coordinates over
    supp nu; absent dimensions are at chi_0.
    """
    if len(nodes) < 1 + nu.max_order:
        raise ValueError("node sequence too short for the multi-index")
    cache = _LagrangeCache(nodes, y)
    dims = nu.support
    total = 0.0
    for orders in itertools.product(*(range(nu.order(d) + 1) for d in dims)):
        mu = MultiIndex(zip(dims, orders))
        weight = 1.0
        for d, k in zip(dims, orders):
            weight *= float(cache.values(d, nu.order(d))[k])
        total += f(point_coords(mu, nodes)) * weight
    return total


class SmolyakOperator:
    """The combination-technique interpolant I_Lambda on a shared Leja family."""

    def __init__(self, lam: DownwardClosedSet, nodes: LejaSequence):
        if len(nodes) < 1 + lam.max_degree():
            raise ValueError("node sequence too short for the index set")
        self.lam = lam
        self.nodes = nodes
        self.coeffs = combination_coefficients(lam)
        self.active_dims = lam.dims()

    def grid(self) -> List[GridPoint]:
        return grid(self.lam, self.nodes)

    def node_weights(self, y: Mapping[int, object], cache: _LagrangeCache | None = None) -> Dict[MultiIndex, object]:
        """Evaluation weights per grid point: (I_Lambda f)(y) = sum_mu w_mu f(chi_mu).

        Coordinates in ``y`` may be scalars or equal-length arrays; weights
        then come out with matching shape.  A shared ``cache`` lets several
        operators on the same node family reuse univariate evaluations.
        """
        if cache is None:
            cache = _LagrangeCache(self.nodes, y)
        weights: Dict[MultiIndex, object] = {}
        for nu, sigma in self.coeffs.items():
            dims = nu.support
            per_dim = [cache.values(d, nu.order(d)) for d in dims]
            for orders in itertools.product(*(range(nu.order(d) + 1) for d in dims)):
                w = float(sigma)
                for vals, k in zip(per_dim, orders):
                    w = w * (vals[..., k] if np.ndim(vals) > 1 else float(vals[k]))
                mu = MultiIndex(zip(dims, orders))
                if mu in weights:
                    weights[mu] = weights[mu] + w
                else:
                    weights[mu] = w
        return weights

    def interpolate(self, samples: Mapping[MultiIndex, float], y: Mapping[int, float]) -> float:
        """(I_Lambda f)(y) from a table of samples at the grid points."""
        total = 0.0
        for mu, w in self.node_weights(y).items():
            if mu not in samples:
                raise KeyError(f"missing sample at grid point {GridPoint(mu)!r}")
            total += w * samples[mu]
        return total

    def make_cache(self, y: Mapping[int, object]) -> _LagrangeCache:
        return _LagrangeCache(self.nodes, y)


def interpolate(
    op: SmolyakOperator, samples: Mapping[MultiIndex, float], y: Mapping[int, float]
) -> float:
    return op.interpolate(samples, y)
