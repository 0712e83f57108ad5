"""Study configuration: flat key=value sections in one plain-text file.

A single file fully determines a study.  Sections:

    [problem]    dim, max_mode, s0, t0, abar, f, a_min (opt. solver_modes, cg_tol)
    [cube]       r, s, n_act
    [surrogate]  pool, kappa, delta, variant, budgets
    [error]      n_samples, seed (opt. fit_drop)
    [output]     directory, formats

The source term ``f`` is either ``bandlimited <kmax> <seed>`` (a smooth
zero-mean trigonometric polynomial with pseudorandom coefficients decaying
like max(1,|j|)^-2) or ``csv <path>`` pointing at a coefficient file.
"""

from __future__ import annotations

import configparser
import hashlib
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from .allocate import MEAN_SQUARE, WORST_CASE
from .spaces import FourierBasisSpec, FourierField
from .surrogate import ADAPTIVE, APRIORI


class ConfigError(ValueError):
    """A configuration value is missing, unparsable, or violates a constraint."""


@dataclass
class StudyConfig:
    """Validated study parameters plus the raw text they came from."""

    # problem
    dim: int
    max_mode: int
    s0: float
    t0: float
    abar: float
    f_spec: str
    a_min: float
    solver_modes: Optional[int]
    cg_tol: float
    # cube
    r: float
    s: float
    n_act: int
    # surrogate
    pool: str
    kappa: float
    delta: float
    variant: str
    budgets: Tuple[int, ...]
    # error
    n_samples: int
    seed: int
    fit_drop: int
    # output
    directory: str
    formats: Tuple[str, ...]

    raw_text: str = field(default="", repr=False)

    @property
    def config_hash(self) -> str:
        return hashlib.sha256(self.raw_text.encode()).hexdigest()[:16]

    def basis(self) -> FourierBasisSpec:
        return FourierBasisSpec(self.dim, self.max_mode, self.s0, self.t0)

    def source_field(self, basis: FourierBasisSpec) -> FourierField:
        return build_source(basis, self.f_spec)

    def abar_field(self, basis: FourierBasisSpec) -> FourierField:
        coeffs = np.zeros(basis.shape)
        coeffs[(0,) * basis.dim] = self.abar
        return FourierField(basis, coeffs)


def build_source(basis: FourierBasisSpec, spec: str) -> FourierField:
    """Deterministic source field from its config string."""
    parts = spec.split()
    if parts and parts[0] == "bandlimited":
        if len(parts) != 3:
            raise ConfigError(
                f"[problem] f: expected 'bandlimited <kmax> <seed>', got {spec!r}"
            )
        kmax, seed = int(parts[1]), int(parts[2])
        if kmax < 1:
            raise ConfigError("[problem] f: bandlimited kmax must be >= 1")
        rng = np.random.default_rng(seed)
        coeffs = rng.standard_normal(basis.shape) * basis.scale(-2.0)
        freq = np.zeros(basis.shape)
        k1 = np.array([(j + 1) // 2 for j in range(basis.n_per_dim)], dtype=float)
        for ax in range(basis.dim):
            shape = [1] * basis.dim
            shape[ax] = basis.n_per_dim
            freq = np.maximum(freq, k1.reshape(shape))
        coeffs[freq > kmax] = 0.0
        coeffs[(0,) * basis.dim] = 0.0  # zero mean
        return FourierField(basis, coeffs)
    if parts and parts[0] == "csv":
        if len(parts) != 2:
            raise ConfigError(f"[problem] f: expected 'csv <path>', got {spec!r}")
        return FourierField.from_csv(basis, parts[1])
    raise ConfigError(f"[problem] f: unknown source spec {spec!r}")


_MISSING = object()


def _get(cp: configparser.ConfigParser, section: str, key: str, cast, default=_MISSING):
    if not cp.has_option(section, key):
        if default is not _MISSING:
            return default
        raise ConfigError(f"[{section}] {key}: required key is missing")
    raw = cp.get(section, key)
    try:
        return cast(raw)
    except ConfigError:
        raise
    except (TypeError, ValueError):
        raise ConfigError(f"[{section}] {key}: cannot parse {raw!r}") from None


def _budget_list(raw: str) -> Tuple[int, ...]:
    vals = tuple(int(v) for v in raw.replace(",", " ").split())
    if not vals:
        raise ValueError("empty")
    return vals


def parse_config(text: str) -> StudyConfig:
    """Parse and validate a study configuration from its raw text."""
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",))
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config file: {exc}") from None
    for section in ("problem", "cube", "surrogate", "error"):
        if not cp.has_section(section):
            raise ConfigError(f"[{section}]: required section is missing")

    dim = _get(cp, "problem", "dim", int)
    max_mode = _get(cp, "problem", "max_mode", int)
    s0 = _get(cp, "problem", "s0", float)
    t0 = _get(cp, "problem", "t0", float)
    abar = _get(cp, "problem", "abar", float)
    f_spec = _get(cp, "problem", "f", str)
    a_min = _get(cp, "problem", "a_min", float, 0.0)
    solver_modes = _get(cp, "problem", "solver_modes", int, None)
    cg_tol = _get(cp, "problem", "cg_tol", float, 1e-12)

    r = _get(cp, "cube", "r", float)
    s = _get(cp, "cube", "s", float)
    n_act = _get(cp, "cube", "n_act", int)

    pool = _get(cp, "surrogate", "pool", str, ADAPTIVE)
    kappa = _get(cp, "surrogate", "kappa", float, 0.5)
    delta = _get(cp, "surrogate", "delta", float, 0.1)
    variant = _get(cp, "surrogate", "variant", str, WORST_CASE)
    budgets = _get(cp, "surrogate", "budgets", _budget_list)

    n_samples = _get(cp, "error", "n_samples", int)
    seed = _get(cp, "error", "seed", int)
    fit_drop = _get(cp, "error", "fit_drop", int, 1)

    directory = _get(cp, "output", "directory", str, ".") if cp.has_section("output") else "."
    formats_raw = (
        _get(cp, "output", "formats", str, "csv") if cp.has_section("output") else "csv"
    )
    formats = tuple(formats_raw.replace(",", " ").split())

    # constraint checks, each naming the offending key
    if dim not in (1, 2, 3):
        raise ConfigError(f"[problem] dim: must be 1, 2 or 3, got {dim}")
    if max_mode < 1:
        raise ConfigError(f"[problem] max_mode: must be >= 1, got {max_mode}")
    if s0 <= dim / 2.0:
        raise ConfigError(f"[problem] s0: must exceed dim/2 = {dim / 2.0}, got {s0}")
    if not 0.0 <= t0 <= 1.0:
        raise ConfigError(f"[problem] t0: must lie in [0, 1], got {t0}")
    if abar <= 0.0:
        raise ConfigError(f"[problem] abar: must be positive, got {abar}")
    if a_min < 0.0:
        raise ConfigError(f"[problem] a_min: must be >= 0, got {a_min}")
    if solver_modes is not None and solver_modes < max_mode:
        raise ConfigError(
            f"[problem] solver_modes: must be >= max_mode = {max_mode}, got {solver_modes}"
        )
    if s <= 1.0:
        raise ConfigError(f"[cube] s: must be > 1, got {s}")
    if r <= 0.0:
        raise ConfigError(f"[cube] r: must be positive, got {r}")
    if n_act < 1:
        raise ConfigError(f"[cube] n_act: must be >= 1, got {n_act}")
    if pool not in (APRIORI, ADAPTIVE):
        raise ConfigError(f"[surrogate] pool: must be '{APRIORI}' or '{ADAPTIVE}', got {pool!r}")
    if kappa <= 0.0:
        raise ConfigError(f"[surrogate] kappa: must be positive, got {kappa}")
    if not 0.0 < delta < 1.0:
        raise ConfigError(f"[surrogate] delta: must lie in (0, 1), got {delta}")
    if variant not in (WORST_CASE, MEAN_SQUARE):
        raise ConfigError(
            f"[surrogate] variant: must be '{WORST_CASE}' or '{MEAN_SQUARE}', got {variant!r}"
        )
    if any(b2 <= b1 for b1, b2 in zip(budgets, budgets[1:])):
        raise ConfigError(f"[surrogate] budgets: must be strictly increasing, got {budgets}")
    if budgets[0] < 1:
        raise ConfigError(f"[surrogate] budgets: must be >= 1, got {budgets}")
    if n_samples < 1:
        raise ConfigError(f"[error] n_samples: must be >= 1, got {n_samples}")
    if fit_drop < 0:
        raise ConfigError(f"[error] fit_drop: must be >= 0, got {fit_drop}")

    return StudyConfig(
        dim=dim,
        max_mode=max_mode,
        s0=s0,
        t0=t0,
        abar=abar,
        f_spec=f_spec,
        a_min=a_min,
        solver_modes=solver_modes,
        cg_tol=cg_tol,
        r=r,
        s=s,
        n_act=n_act,
        pool=pool,
        kappa=kappa,
        delta=delta,
        variant=variant,
        budgets=budgets,
        n_samples=n_samples,
        seed=seed,
        fit_drop=fit_drop,
        directory=directory,
        formats=formats,
        raw_text=text,
    )


def load_config(path) -> StudyConfig:
    with open(path) as fh:
        return parse_config(fh.read())
