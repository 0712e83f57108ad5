"""Fourier function-space layer on the periodic unit cell.

Real trigonometric orthonormal basis on [0,1]^d, truncated coefficient
fields, weighted smoothness norms, the encoder/decoder pair for the
operator surrogate, and the parameter cube with its lift into coefficient
space.

Basis convention (1-d factors, L2([0,1])-orthonormal):

    xi_0 = 1,   xi_{2k-1}(x) = sqrt(2) sin(2 pi k x),
                xi_{2k}(x)   = sqrt(2) cos(2 pi k x),

tensorized over dimensions.  The mode vector j lives in {0,..,2M}^d and
|j| denotes its Euclidean modulus; the physical frequency of 1-d index j
is ceil(j/2).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Sequence, Tuple

import numpy as np


class MembershipError(ValueError):
    """Input lies outside the admissible coefficient cube."""


def mode_frequency(j: int) -> int:
    """Physical frequency of 1-d basis index j (0->0, 2k-1 and 2k -> k)."""
    return (j + 1) // 2


class FourierBasisSpec:
    """Truncated tensor trigonometric basis with input/output scale exponents.

    Parameters
    ----------
    dim : int
        Spatial dimension, 1..3.
    max_mode : int
        Frequency truncation M per dimension; 1-d indices run over 0..2M.
    s0 : float
        Input smoothness exponent (psi_j = max(1,|j|)^{-s0} xi_j).
    t0 : float
        Output smoothness exponent (eta_j = max(1,|j|)^{-t0} xi_j).
    """

    def __init__(self, dim: int, max_mode: int, s0: float = 0.0, t0: float = 0.0):
        if dim not in (1, 2, 3):
            raise ValueError("dim must be 1, 2 or 3")
        if max_mode < 0:
            raise ValueError("max_mode must be >= 0")
        if s0 < 0:
            raise ValueError("s0 must be >= 0")
        if not 0.0 <= t0 <= 1.0:
            raise ValueError("t0 must lie in [0, 1]")
        self.dim = dim
        self.max_mode = max_mode
        self.s0 = float(s0)
        self.t0 = float(t0)
        self.n_per_dim = 2 * max_mode + 1
        self.shape = (self.n_per_dim,) * dim

        axes = np.arange(self.n_per_dim)
        grids = np.meshgrid(*([axes] * dim), indexing="ij")
        self.modulus = np.sqrt(sum(g.astype(float) ** 2 for g in grids))
        self._scale = np.maximum(1.0, self.modulus)

        order = sorted(
            np.ndindex(self.shape), key=lambda j: (float(np.hypot.reduce(np.array(j, float))), j)
        )
        #: mode tuples in (|j|, lex) enumeration order
        self.mode_order: List[Tuple[int, ...]] = [tuple(int(v) for v in j) for j in order]
        self._flat_order = np.array(
            [np.ravel_multi_index(j, self.shape) for j in self.mode_order]
        )
        self.n_modes = len(self.mode_order)
        self._rank = {mode: i + 1 for i, mode in enumerate(self.mode_order)}

    def scale(self, power: float) -> np.ndarray:
        """max(1,|j|)^power as a dense array over the coefficient shape."""
        return self._scale**power

    def mode_rank(self, mode: Tuple[int, ...]) -> int:
        """1-based position of a mode in the enumeration order."""
        return self._rank[tuple(mode)]

    def ordered(self, coeffs: np.ndarray) -> np.ndarray:
        """Flatten a coefficient array into enumeration order."""
        return coeffs.reshape(-1)[self._flat_order]

    def unordered(self, flat: np.ndarray) -> np.ndarray:
        """Inverse of :meth:`ordered`."""
        out = np.zeros(self.n_modes)
        out[self._flat_order] = flat
        return out.reshape(self.shape)

    def synthesis_matrix(self, n_grid: int) -> np.ndarray:
        """Values of the 1-d basis on the uniform grid x_g = g/n_grid; shape (n_grid, 2M+1)."""
        x = np.arange(n_grid) / n_grid
        cols = [np.ones(n_grid)]
        for k in range(1, self.max_mode + 1):
            cols.append(np.sqrt(2.0) * np.sin(2 * np.pi * k * x))
            cols.append(np.sqrt(2.0) * np.cos(2 * np.pi * k * x))
        return np.stack(cols, axis=1)

    def compatible(self, other: "FourierBasisSpec") -> bool:
        return (
            self.dim == other.dim
            and self.max_mode == other.max_mode
            and self.s0 == other.s0
            and self.t0 == other.t0
        )

    def __repr__(self) -> str:
        return (
            f"FourierBasisSpec(dim={self.dim}, max_mode={self.max_mode}, "
            f"s0={self.s0}, t0={self.t0})"
        )


class FourierField:
    """Function on the torus as a dense array of xi-coefficients."""

    def __init__(self, basis: FourierBasisSpec, coeffs: np.ndarray | None = None):
        if coeffs is None:
            coeffs = np.zeros(basis.shape)
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.shape != basis.shape:
            raise ValueError(f"coefficient shape {coeffs.shape} != basis shape {basis.shape}")
        self.basis = basis
        self.coeffs = coeffs

    def copy(self) -> "FourierField":
        return FourierField(self.basis, self.coeffs.copy())

    def hs_norm(self, s: float) -> float:
        """Sobolev-scale norm (sum c_j^2 max(1,|j|)^{2s})^{1/2}."""
        return float(np.sqrt(np.sum(self.coeffs**2 * self.basis.scale(2 * s))))

    def values(self, n_grid: int) -> np.ndarray:
        """Evaluate on the uniform collocation grid (n_grid points per dimension)."""
        B = self.basis.synthesis_matrix(n_grid)
        out = self.coeffs
        for axis in range(self.basis.dim):
            out = np.tensordot(B, out, axes=([1], [axis]))
            out = np.moveaxis(out, 0, axis)
        return out

    @classmethod
    def from_values(cls, basis: FourierBasisSpec, vals: np.ndarray) -> "FourierField":
        """Project grid values back onto the basis via trapezoid-exact quadrature.

        Exact for trigonometric polynomials whose frequency stays below
        n_grid - max_mode in every dimension.
        """
        n_grid = vals.shape[0]
        A = basis.synthesis_matrix(n_grid).T / n_grid
        out = vals
        for axis in range(basis.dim):
            out = np.tensordot(A, out, axes=([1], [axis]))
            out = np.moveaxis(out, 0, axis)
        return cls(basis, out)

    def coefficient(self, mode: Sequence[int]) -> float:
        return float(self.coeffs[tuple(mode)])

    def __add__(self, other: "FourierField") -> "FourierField":
        self._check(other)
        return FourierField(self.basis, self.coeffs + other.coeffs)

    def __sub__(self, other: "FourierField") -> "FourierField":
        self._check(other)
        return FourierField(self.basis, self.coeffs - other.coeffs)

    def __mul__(self, scalar: float) -> "FourierField":
        return FourierField(self.basis, self.coeffs * scalar)

    __rmul__ = __mul__

    def _check(self, other: "FourierField") -> None:
        if self.coeffs.shape != other.coeffs.shape:
            raise ValueError("field shapes differ")

    # CSV: one row per mode, columns (mode tuple..., coefficient)
    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(",".join(f"j{k+1}" for k in range(self.basis.dim)) + ",coeff\n")
            for mode in self.basis.mode_order:
                fh.write(",".join(str(m) for m in mode) + f",{float(self.coeffs[mode])!r}\n")

    @classmethod
    def from_csv(cls, basis: FourierBasisSpec, path) -> "FourierField":
        coeffs = np.zeros(basis.shape)
        with open(path) as fh:
            header = fh.readline()
            ncols = len(header.strip().split(","))
            if ncols != basis.dim + 1:
                raise ValueError(f"field CSV has {ncols - 1} mode columns, basis dim is {basis.dim}")
            for line in fh:
                if not line.strip():
                    continue
                parts = line.strip().split(",")
                mode = tuple(int(p) for p in parts[:-1])
                coeffs[mode] = float(parts[-1])
        return cls(basis, coeffs)


@dataclass(frozen=True)
class WeightSequence:
    """Mode weights w_j = max(1,|j|)^{-decay}; default decay is the dimension."""

    dim: int
    decay: float | None = None

    @property
    def exponent(self) -> float:
        return float(self.dim if self.decay is None else self.decay)

    def weights_for(self, basis: FourierBasisSpec) -> np.ndarray:
        """Weights in the (|j|, lex) enumeration order (nonincreasing)."""
        return basis.ordered(basis.scale(-self.exponent))


@dataclass(frozen=True)
class CubeDomain:
    """Admissible parameter cube: |coefficient_j| <= r w_j^s on active dims."""

    r: float
    s: float
    weights: WeightSequence
    active: int

    def __post_init__(self):
        if self.r <= 0:
            raise ValueError("r must be positive")
        if self.s <= 1:
            raise ValueError("s must be > 1")
        if self.active < 1:
            raise ValueError("active dimension count must be >= 1")

    def radii(self, basis: FourierBasisSpec) -> np.ndarray:
        """Coefficient half-widths r w_j^s over the first ``active`` modes."""
        w = self.weights.weights_for(basis)[: self.active]
        return self.r * w**self.s

    def truncation_bias(self, basis: FourierBasisSpec) -> float:
        """Upper bound r (sum_{j > active} w_j^{2s})^{1/2} on the pinned-tail norm."""
        w = self.weights.weights_for(basis)[self.active :]
        return float(self.r * np.sqrt(np.sum(w ** (2 * self.s))))


def encode(basis: FourierBasisSpec, u: FourierField) -> np.ndarray:
    """Dual-frame analysis coefficients (c_j max(1,|j|)^{s0}) in enumeration order."""
    if u.basis.shape != basis.shape:
        raise ValueError("field was built on an incompatible basis")
    return basis.ordered(u.coeffs * basis.scale(basis.s0))


def decode(basis: FourierBasisSpec, c: Sequence[float]) -> FourierField:
    """Synthesis sum c_j eta_j; xi-coefficients are c_j max(1,|j|)^{-t0}."""
    c = np.asarray(c, dtype=float)
    if len(c) > basis.n_modes:
        raise ValueError(f"{len(c)} coefficients exceed truncation ({basis.n_modes} modes)")
    flat = np.zeros(basis.n_modes)
    flat[: len(c)] = c
    return FourierField(basis, basis.unordered(flat) * basis.scale(-basis.t0))


def lift(domain: CubeDomain, basis: FourierBasisSpec, y: Sequence[float]) -> FourierField:
    """sigma_r^s(y) = r sum_j w_j^s y_j psi_j over the active parameter dims."""
    y = np.asarray(y, dtype=float)
    if len(y) < domain.active:
        raise ValueError(f"parameter point has {len(y)} coords, need {domain.active}")
    y = y[: domain.active]
    if np.any(np.abs(y) > 1.0):
        bad = int(np.argmax(np.abs(y) > 1.0)) + 1
        raise MembershipError(f"coordinate {bad} outside [-1, 1]")
    flat = np.zeros(basis.n_modes)
    flat[: domain.active] = domain.radii(basis) * y
    return FourierField(basis, basis.unordered(flat) * basis.scale(-basis.s0))


def rescale(domain: CubeDomain, basis: FourierBasisSpec, c: Sequence[float], tol: float = 0.0) -> np.ndarray:
    """y_j = c_j / (r w_j^s); inverse of encode(lift(.)) on the cube.

    Coefficients may exceed the cube radius by a relative ``tol`` and are
    clamped; larger violations raise with the offending 1-based index.
    """
    c = np.asarray(c, dtype=float)[: domain.active]
    radii = domain.radii(basis)
    y = c / radii
    over = np.abs(y) > 1.0 + tol
    if np.any(over):
        bad = int(np.argmax(over)) + 1
        raise MembershipError(
            f"coefficient {bad} violates cube membership: "
            f"|{float(c[bad - 1])!r}| > {float(radii[bad - 1])!r}"
        )
    return np.clip(y, -1.0, 1.0)


def sample_cube(domain: CubeDomain, rng: np.random.Generator | int) -> np.ndarray:
    """One uniform draw from [-1, 1]^active; deterministic for a given seed."""
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    return rng.uniform(-1.0, 1.0, size=domain.active)
