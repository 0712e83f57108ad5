"""Pseudo-spectral oracle for the periodic diffusion equation.

Solves  -div((abar + a) grad u) = f  on the unit torus with zero-mean u.
Coefficient products are formed on an oversampled collocation grid (no
aliasing below the solver truncation), differentiation is diagonal in mode
space, and the zero-mean system is solved by conjugate gradients with the
inverse Laplacian as preconditioner.
"""

from __future__ import annotations

from typing import Dict, List, Sequence, Tuple

import numpy as np

from .spaces import FourierBasisSpec, FourierField, mode_frequency


class EllipticityError(RuntimeError):
    """Grid minimum of the total coefficient fell below the admissible floor."""


class SolverError(RuntimeError):
    """Conjugate gradients did not reach the requested residual."""


def _diff_1d(c: np.ndarray, freqs: np.ndarray, axis: int) -> np.ndarray:
    """d/dx along ``axis`` in the trig basis.

    Index 2k-1 (sin) maps to 2k (cos) with factor +2 pi k; index 2k (cos)
    maps to 2k-1 (sin) with factor -2 pi k; the constant mode vanishes.
    """
    c = np.moveaxis(c, axis, 0)
    out = np.zeros_like(c)
    n = c.shape[0]
    k = freqs[1:n:2].reshape((-1,) + (1,) * (c.ndim - 1))  # sin-row frequencies 1,2,...
    out[2::2] = 2 * np.pi * k * c[1::2]  # sin -> cos
    out[1::2] = -2 * np.pi * k * c[2::2]  # cos -> sin
    return np.moveaxis(out, 0, axis)


class PdeOracle:
    """Coefficient-to-solution map at a fixed spectral resolution.

    Parameters
    ----------
    basis : FourierBasisSpec
        Input/output truncation; carries the encoder/decoder exponents.
    abar : FourierField
        Nominal coefficient on ``basis``.
    f : FourierField
        Zero-mean source on ``basis``.
    solver_modes : int, optional
        Internal resolution M_solve >= basis.max_mode (default 4x).
    cg_tol : float
        Relative residual tolerance.
    a_min : float
        Ellipticity floor; solves refuse coefficients whose grid minimum
        does not exceed it.
    """

    def __init__(
        self,
        basis: FourierBasisSpec,
        abar: FourierField,
        f: FourierField,
        solver_modes: int | None = None,
        cg_tol: float = 1e-12,
        a_min: float = 0.0,
    ):
        if solver_modes is None:
            solver_modes = 4 * basis.max_mode
        if solver_modes < basis.max_mode:
            raise ValueError("solver_modes must be >= basis.max_mode")
        if abs(f.coeffs[(0,) * basis.dim]) > 0:
            raise ValueError("source must have zero mean")
        self.basis = basis
        self.abar = abar
        self.f = f
        self.cg_tol = float(cg_tol)
        self.a_min = float(a_min)
        self.solver_modes = int(solver_modes)

        d = basis.dim
        self.solver_basis = FourierBasisSpec(d, solver_modes, s0=basis.s0, t0=basis.t0)
        # grid exact for triple products: frequencies up to 3*M_solve
        self.n_grid = 3 * solver_modes + 2
        self._B = self.solver_basis.synthesis_matrix(self.n_grid)
        self._freqs = np.array([mode_frequency(j) for j in range(self.solver_basis.n_per_dim)])

        # inverse-Laplacian preconditioner, diagonal in mode space
        grids = np.meshgrid(*([self._freqs] * d), indexing="ij")
        lap = 4 * np.pi**2 * sum(g.astype(float) ** 2 for g in grids)
        lap[(0,) * d] = 1.0
        self._inv_lap = 1.0 / lap
        self._inv_lap[(0,) * d] = 0.0

        self._abar_grid = self._to_grid(self._embed(abar.coeffs))
        self._f_solver = self._embed(f.coeffs)
        self._cache: Dict[bytes, FourierField] = {}
        self.last_residuals: List[float] = []

    # -- transforms -------------------------------------------------------

    def _embed(self, coeffs: np.ndarray) -> np.ndarray:
        """Zero-pad oracle-basis coefficients into the solver truncation."""
        out = np.zeros(self.solver_basis.shape)
        src = tuple(slice(0, n) for n in coeffs.shape)
        out[src] = coeffs
        return out

    def _to_grid(self, coeffs: np.ndarray) -> np.ndarray:
        out = coeffs
        for axis in range(self.basis.dim):
            out = np.moveaxis(np.tensordot(self._B, out, axes=([1], [axis])), 0, axis)
        return out

    def _to_modes(self, vals: np.ndarray) -> np.ndarray:
        A = self._B.T / self.n_grid
        out = vals
        for axis in range(self.basis.dim):
            out = np.moveaxis(np.tensordot(A, out, axes=([1], [axis])), 0, axis)
        return out

    def _gradient(self, coeffs: np.ndarray) -> List[np.ndarray]:
        return [_diff_1d(coeffs, self._freqs, ax) for ax in range(self.basis.dim)]

    def apply_operator(self, a_total_grid: np.ndarray, u_coeffs: np.ndarray) -> np.ndarray:
        """-div(a grad u) in solver coefficients; exact Galerkin at this grid."""
        out = np.zeros_like(u_coeffs)
        for ax, du in enumerate(self._gradient(u_coeffs)):
            flux = self._to_modes(a_total_grid * self._to_grid(du))
            out -= _diff_1d(flux, self._freqs, ax)
        out[(0,) * self.basis.dim] = 0.0
        return out

    def operator_matrix_free(self, a: FourierField):
        """Return the zero-mean operator u_coeffs -> A u_coeffs for a given a."""
        a_grid = self._abar_grid + self._to_grid(self._embed(a.coeffs))
        return lambda u: self.apply_operator(a_grid, u)

    def forcing_for(self, a: FourierField, u: FourierField) -> FourierField:
        """Manufactured source -div((abar + a) grad u) on the solver basis."""
        a_grid = self._abar_grid + self._to_grid(self._embed(a.coeffs))
        f = self.apply_operator(a_grid, self._embed(u.coeffs))
        return FourierField(self.solver_basis, f)

    # -- public operations -------------------------------------------------

    def check_ellipticity(self, a: FourierField) -> float:
        """Minimum of abar + a on the collocation grid."""
        return float((self._abar_grid + self._to_grid(self._embed(a.coeffs))).min())

    def solve(self, a: FourierField, rhs: FourierField | None = None) -> FourierField:
        """Zero-mean solution of the discrete weak form, cached per coefficient."""
        key = a.coeffs.tobytes() + (rhs.coeffs.tobytes() if rhs is not None else b"")
        hit = self._cache.get(key)
        if hit is not None:
            return hit

        a_grid = self._abar_grid + self._to_grid(self._embed(a.coeffs))
        amin = float(a_grid.min())
        if amin <= self.a_min:
            raise EllipticityError(
                f"grid minimum of abar + a is {amin!r}, not above floor {self.a_min!r}"
            )

        b = self._f_solver if rhs is None else self._embed(rhs.coeffs)
        b = b.copy()
        b[(0,) * self.basis.dim] = 0.0
        u = self._pcg(lambda v: self.apply_operator(a_grid, v), b)
        out = FourierField(self.solver_basis, u)
        self._cache[key] = out
        return out

    def _pcg(self, apply_A, b: np.ndarray) -> np.ndarray:
        norm_b = float(np.linalg.norm(b))
        x = np.zeros_like(b)
        if norm_b == 0.0:
            self.last_residuals = [0.0]
            return x
        r = b.copy()
        z = self._inv_lap * r
        p = z.copy()
        rz = float(np.sum(r * z))
        max_iter = max(200, 10 * self.solver_modes**self.basis.dim)
        residuals = [1.0]
        for _ in range(max_iter):
            Ap = apply_A(p)
            denom = float(np.sum(p * Ap))
            if denom <= 0.0:
                # breakdown: the search direction has collapsed (residual at
                # round-off level); no further reduction is possible
                self.last_residuals = residuals
                raise SolverError(
                    f"stagnation at relative residual {residuals[-1]!r} "
                    f"(tolerance {self.cg_tol!r})"
                )
            alpha = rz / denom
            x += alpha * p
            r -= alpha * Ap
            rel = float(np.linalg.norm(r)) / norm_b
            residuals.append(rel)
            if rel <= self.cg_tol:
                self.last_residuals = residuals
                return x
            z = self._inv_lap * r
            rz_new = float(np.sum(r * z))
            p = z + (rz_new / rz) * p
            rz = rz_new
        self.last_residuals = residuals
        raise SolverError(
            f"no convergence within {max_iter} iterations, relative residual {residuals[-1]!r}"
        )

    def observe(self, a: FourierField, mode: Sequence[int]) -> float:
        """<G(a), dual eta at mode> = solution xi-coefficient times max(1,|j|)^{t0}."""
        mode = tuple(int(m) for m in mode)
        if any(m >= self.basis.n_per_dim for m in mode):
            raise ValueError(f"mode {mode} outside output truncation")
        u = self.solve(a)
        weight = max(1.0, float(np.sqrt(sum(m * m for m in mode)))) ** self.basis.t0
        return float(u.coeffs[mode]) * weight

    def observe_vector(self, a: FourierField, modes: Sequence[Tuple[int, ...]]) -> np.ndarray:
        """All requested observations from a single cached solve."""
        u = self.solve(a)
        out = np.empty(len(modes))
        for i, mode in enumerate(modes):
            mode = tuple(int(m) for m in mode)
            weight = max(1.0, float(np.sqrt(sum(m * m for m in mode)))) ** self.basis.t0
            out[i] = float(u.coeffs[mode]) * weight
        return out

    @property
    def solve_count(self) -> int:
        return len(self._cache)
