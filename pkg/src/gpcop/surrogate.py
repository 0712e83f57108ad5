"""Assembly and evaluation of the sparse-grid operator surrogate.

The surrogate is the composition decode . p . encode, where p interpolates
each retained output coefficient y -> <G(sigma(y)), dual eta_j> on its own
downward-closed index set, all sets being prefixes of one enumeration of
input multi-indices.  Budgeted construction spends at most N scalar
observations in total across outputs.
"""

from __future__ import annotations

import hashlib
import heapq
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .allocate import (
    WORST_CASE,
    AllocationPlan,
    budget_for,
    build_output_sets,
)
from .multiindex import DownwardClosedSet, MultiIndex
from .smolyak import SmolyakOperator
from .spaces import (
    CubeDomain,
    FourierBasisSpec,
    FourierField,
    MembershipError,
    decode,
    encode,
    lift,
    rescale,
    sample_cube,
)
from .univariate import LejaSequence, leja_points

APRIORI = "apriori"
ADAPTIVE = "adaptive"

#: relative slack for cube membership at evaluation time (float round-off)
CUBE_SLACK = 1e-8


def theoretical_t_max(basis: FourierBasisSpec) -> float:
    """Largest output-scale exponent supported by the diffusion testbed."""
    return (1.0 + basis.s0 - basis.dim / 2.0 - basis.t0) / basis.dim


class IdentityOracle:
    """G(a) = a; the simplest holomorphic operator, used for sanity checks."""

    def __init__(self, basis: FourierBasisSpec):
        self.basis = basis
        self.solve_count = 0

    def solve(self, a: FourierField) -> FourierField:
        self.solve_count += 1
        return FourierField(self.basis, a.coeffs.copy())

    def observe_vector(self, a: FourierField, modes: Sequence[Tuple[int, ...]]) -> np.ndarray:
        out = np.empty(len(modes))
        for i, mode in enumerate(modes):
            weight = max(1.0, math.sqrt(sum(m * m for m in mode))) ** self.basis.t0
            out[i] = a.coeffs[tuple(mode)] * weight
        return out


@dataclass(frozen=True)
class CandidatePool:
    """Enumeration of input multi-indices with downward-closed prefixes."""

    enumeration: Tuple[MultiIndex, ...]
    priorities: Tuple[float, ...]
    mode: str


def _apriori_rhos(domain: CubeDomain, basis: FourierBasisSpec, kappa: float) -> np.ndarray:
    radii = domain.radii(basis)
    return np.maximum(1.0 / radii, 1.0) * (1.0 + kappa)


def _apriori_pool(domain: CubeDomain, basis: FourierBasisSpec, pool_size: int, kappa: float) -> CandidatePool:
    log_rho = np.log(_apriori_rhos(domain, basis, kappa))
    ndim = domain.active
    zero = MultiIndex()
    # ties by (|nu|, lexicographic with earlier dimensions first)
    heap = [(0.0, 0, (0,) * ndim, zero)]
    seen = {zero}
    enumeration: List[MultiIndex] = []
    priorities: List[float] = []
    while heap and len(enumeration) < pool_size:
        logb, _, negdense, nu = heapq.heappop(heap)
        enumeration.append(nu)
        priorities.append(math.exp(-logb))
        for d in range(1, ndim + 1):
            child = nu.increment(d)
            if child in seen:
                continue
            seen.add(child)
            cd = negdense[: d - 1] + (negdense[d - 1] - 1,) + negdense[d:]
            heapq.heappush(heap, (logb + log_rho[d - 1], child.total_order, cd, child))
    return CandidatePool(tuple(enumeration), tuple(priorities), APRIORI)


def _grid_parameter_point(mu: MultiIndex, nodes: LejaSequence, n_act: int) -> np.ndarray:
    y = np.zeros(n_act)
    for dim, order in mu:
        y[dim - 1] = nodes[order]
    return y


def _adaptive_pool(
    domain: CubeDomain,
    basis: FourierBasisSpec,
    pool_size: int,
    oracle,
    nodes: LejaSequence,
    kappa: float,
) -> CandidatePool:
    """Dimension-adaptive greedy enumeration driven by measured surpluses.

    A candidate's score is the l2 norm (= output-space norm) of its
    interpolation residual against the current set, measured at the
    candidate's own grid point from pilot oracle observations.  Among the
    a-priori rule and this greedy, both yield downward-closed prefixes.
    """
    modes = basis.mode_order
    obs_cache: Dict[MultiIndex, np.ndarray] = {}

    def observations(mu: MultiIndex) -> np.ndarray:
        out = obs_cache.get(mu)
        if out is None:
            a = lift(domain, basis, _grid_parameter_point(mu, nodes, domain.active))
            out = oracle.observe_vector(a, modes)
            obs_cache[mu] = out
        return out

    accepted: List[MultiIndex] = [MultiIndex()]
    priorities: List[float] = [math.inf]
    scores: Dict[MultiIndex, float] = {}
    operator: Optional[SmolyakOperator] = None

    accepted_set = {MultiIndex()}

    def admissible(nu: MultiIndex) -> bool:
        return all(nu.decrement(d) in accepted_set for d in nu.support)

    while len(accepted) < pool_size:
        lam = DownwardClosedSet(accepted)
        operator = SmolyakOperator(lam, nodes)
        last = accepted[-1]
        # score candidates that just became admissible
        for d in range(1, domain.active + 1):
            cand = last.increment(d)
            if cand in scores or cand in accepted_set or not admissible(cand):
                continue
            if cand.max_order + 1 > len(nodes):
                continue
            y = _grid_parameter_point(cand, nodes, domain.active)
            ydict = {dim: y[dim - 1] for dim in set(operator.active_dims) | set(cand.support)}
            weights = operator.node_weights(ydict)
            interp = np.zeros(len(modes))
            for mu, w in weights.items():
                interp += w * observations(mu)
            scores[cand] = float(np.linalg.norm(observations(cand) - interp))
        if not scores:
            break
        best = max(
            scores,
            key=lambda nu: (scores[nu], -nu.total_order, tuple(nu.dense(domain.active))),
        )
        accepted.append(best)
        accepted_set.add(best)
        priorities.append(min(priorities[-1], scores.pop(best)))
    return CandidatePool(tuple(accepted), tuple(priorities), ADAPTIVE)


def candidate_pool(
    domain: CubeDomain,
    basis: FourierBasisSpec,
    pool_size: int,
    mode: str = APRIORI,
    oracle=None,
    nodes: LejaSequence | None = None,
    kappa: float = 0.5,
) -> CandidatePool:
    """Enumerate candidate input multi-indices by nonincreasing priority."""
    if pool_size < 1:
        raise ValueError("pool_size must be >= 1")
    if mode == APRIORI:
        return _apriori_pool(domain, basis, pool_size, kappa)
    if mode == ADAPTIVE:
        if oracle is None:
            raise ValueError("adaptive pool construction requires an oracle")
        if nodes is None:
            nodes = leja_points(16)
        return _adaptive_pool(domain, basis, pool_size, oracle, nodes, kappa)
    raise ValueError(f"unknown pool mode {mode!r}")


@dataclass
class ErrorReport:
    """Sampled error summary; the worst-case value is a lower bound of the sup."""

    kind: str
    value: float
    n_samples: int
    seed: int
    tail: float
    argmax_y: Optional[np.ndarray] = None
    std_error: Optional[float] = None
    errors: Optional[np.ndarray] = None


class SurrogateModel:
    """Built surrogate: per-output index sets, nodes and stored observations."""

    def __init__(
        self,
        domain: CubeDomain,
        basis: FourierBasisSpec,
        nodes: LejaSequence,
        plan: AllocationPlan,
        enumeration: Tuple[MultiIndex, ...],
        output_modes: List[Tuple[int, ...]],
        sets: List[DownwardClosedSet],
        samples: np.ndarray,
        metadata: Dict[str, str],
    ):
        self.domain = domain
        self.basis = basis
        self.nodes = nodes
        self.plan = plan
        self.enumeration = enumeration
        self.output_modes = output_modes
        self.sets = sets
        self.samples = samples  # shape (len(enumeration prefix), n_outputs)
        self.metadata = metadata
        self._rank = {nu: i for i, nu in enumerate(enumeration)}
        self._operators: Dict[int, SmolyakOperator] = {}

    @property
    def realized_cost(self) -> int:
        return sum(len(lam) for lam in self.sets)

    def operator_for(self, length: int) -> SmolyakOperator:
        op = self._operators.get(length)
        if op is None:
            op = SmolyakOperator(DownwardClosedSet(self.enumeration[:length]), self.nodes)
            self._operators[length] = op
        return op

    def coefficient_map(self, y: np.ndarray) -> np.ndarray:
        """Interpolated output coefficients at a rescaled parameter point."""
        dims = set()
        for lam in self.sets[:1]:
            dims.update(lam.dims())
        ydict = {dim: float(y[dim - 1]) for dim in dims}
        out = np.zeros(len(self.output_modes))
        cache = None
        # group output coordinates by index-set size (sets are nested prefixes)
        groups: Dict[int, List[int]] = {}
        for j, lam in enumerate(self.sets):
            groups.setdefault(len(lam), []).append(j)
        for length, cols in groups.items():
            op = self.operator_for(length)
            if cache is None:
                cache = op.make_cache(ydict)
            weights = op.node_weights(ydict, cache)
            wvec = np.zeros(length)
            for mu, w in weights.items():
                wvec[self._rank[mu]] = w
            out[cols] = wvec @ self.samples[:length, cols]
        return out

    def evaluate(self, a: FourierField, coefficient_map=None) -> FourierField:
        """Surrogate output for an admissible input field.

        ``coefficient_map`` may replace the interpolation stage with any
        map from the rescaled parameter point to output coefficients.
        """
        c = encode(self.basis, a)
        tail = c[self.domain.active :]
        slack = CUBE_SLACK * self.domain.r
        if tail.size and float(np.abs(tail).max()) > slack:
            bad = self.domain.active + int(np.argmax(np.abs(tail))) + 1
            raise MembershipError(
                f"coefficient {bad} beyond active dimensions exceeds slack {slack!r}"
            )
        y = rescale(self.domain, self.basis, c, tol=CUBE_SLACK)
        values = (coefficient_map or self.coefficient_map)(y)
        out = np.zeros(self.basis.n_modes)
        for mode, v in zip(self.output_modes, values):
            out[self.basis.mode_rank(mode) - 1] = v
        return decode(self.basis, out)

    # -- persistence -------------------------------------------------------

    def save(self, path) -> None:
        lines = ["gpcop-surrogate v1"]
        meta = dict(self.metadata)
        meta.pop("created", None)  # keep model files reproducible
        meta["realized_cost"] = str(self.realized_cost)
        lines.append(f"meta {len(meta)}")
        for k in sorted(meta):
            lines.append(f"{k} {meta[k]}")
        lines.append(
            f"basis {self.basis.dim} {self.basis.max_mode} {self.basis.s0!r} {self.basis.t0!r}"
        )
        lines.append(
            f"domain {self.domain.r!r} {self.domain.s!r} {self.domain.weights.exponent!r} {self.domain.active}"
        )
        lines.append(f"nodes {len(self.nodes)} {self.nodes.grid_resolution}")
        lines.extend(repr(float(x)) for x in self.nodes.points)
        lines.append(
            f"plan {self.plan.n} {len(self.plan.m)} {self.plan.variant} "
            f"{self.plan.alpha!r} {self.plan.beta!r}"
        )
        lines.append(f"enumeration {len(self.enumeration)}")
        lines.extend(nu.to_line() for nu in self.enumeration)
        lines.append(f"outputs {len(self.output_modes)}")
        for j, (mode, lam) in enumerate(zip(self.output_modes, self.sets)):
            lines.append(f"output {','.join(str(m) for m in mode)} {len(lam)}")
            for i, nu in enumerate(lam):
                lines.append(f"{nu.to_line()}|{float(self.samples[i, j])!r}")
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")

    @classmethod
    def load(cls, path) -> "SurrogateModel":
        from .spaces import WeightSequence

        with open(path) as fh:
            lines = fh.read().splitlines()
        if not lines or lines[0] != "gpcop-surrogate v1":
            raise ValueError(f"{path} is not a surrogate model file")
        pos = 1
        n_meta = int(lines[pos].split()[1])
        pos += 1
        meta = {}
        for _ in range(n_meta):
            k, _, v = lines[pos].partition(" ")
            meta[k] = v
            pos += 1
        _, d, mm, s0, t0 = lines[pos].split()
        basis = FourierBasisSpec(int(d), int(mm), float(s0), float(t0))
        pos += 1
        _, r, s, decay, active = lines[pos].split()
        domain = CubeDomain(
            float(r), float(s), WeightSequence(basis.dim, float(decay)), int(active)
        )
        pos += 1
        _, n_nodes, res = lines[pos].split()
        pos += 1
        pts = np.array([float(lines[pos + i]) for i in range(int(n_nodes))])
        pos += int(n_nodes)
        nodes = LejaSequence(pts, int(res))
        _, plan_n, plan_len, variant, alpha, beta = lines[pos].split()
        pos += 1
        plan = rebuild_plan(int(plan_n), int(plan_len), variant, float(alpha), float(beta))
        n_enum = int(lines[pos].split()[1])
        pos += 1
        enumeration = tuple(MultiIndex.from_line(lines[pos + i]) for i in range(n_enum))
        pos += n_enum
        n_out = int(lines[pos].split()[1])
        pos += 1
        output_modes: List[Tuple[int, ...]] = []
        sets: List[DownwardClosedSet] = []
        samples = np.zeros((n_enum, n_out))
        for j in range(n_out):
            _, mode_s, count_s = lines[pos].split()
            pos += 1
            mode = tuple(int(v) for v in mode_s.split(","))
            count = int(count_s)
            members = []
            for i in range(count):
                idx_s, _, val_s = lines[pos].partition("|")
                members.append(MultiIndex.from_line(idx_s))
                samples[i, j] = float(val_s)
                pos += 1
            output_modes.append(mode)
            sets.append(DownwardClosedSet(members))
        return cls(domain, basis, nodes, plan, enumeration, output_modes, sets, samples, meta)


def rebuild_plan(n: int, length: int, variant: str, alpha: float, beta: float) -> AllocationPlan:
    """Rebuild a persisted plan from its support parameter and stored length."""
    from .allocate import allocate_mean_square, allocate_worst_case

    make = allocate_worst_case if variant == WORST_CASE else allocate_mean_square
    return make(n, alpha, beta, length)


def build(
    domain: CubeDomain,
    basis: FourierBasisSpec,
    oracle,
    pool: CandidatePool,
    N: int,
    variant: str = WORST_CASE,
    alpha: float | None = None,
    beta: float | None = None,
    delta: float = 0.1,
    node_resolution: int = 100_000,
    config_hash: str = "",
) -> SurrogateModel:
    """Construct the surrogate within an observation budget of N.

    One oracle solve is performed per grid point of the largest index set;
    nested sets and nested Leja grids make all smaller sets reuse those
    solves, and only the scalar observations actually stored count toward
    the budget.
    """
    if N < 1:
        raise ValueError("budget must be >= 1")
    if alpha is None:
        alpha = domain.s - delta / 2.0
    if beta is None:
        t_max = theoretical_t_max(basis)
        if t_max <= delta / 2.0:
            raise ValueError("output scale admits no positive smoothness budget")
        beta = t_max - delta / 2.0

    plan = budget_for(N, variant, alpha, beta, I=len(pool.enumeration))
    prefix = pool.enumeration[: len(plan.m)]
    sets = build_output_sets(list(prefix), plan)

    n_out = min(len(sets), basis.n_modes)
    sets = sets[:n_out]
    output_modes = [basis.mode_order[j] for j in range(n_out)]

    max_order = max((nu.max_order for nu in prefix), default=0)
    nodes = leja_points(max_order + 1, max(node_resolution, 10 * (max_order + 1)))

    set_sizes = [len(lam) for lam in sets]
    samples = np.zeros((len(prefix), n_out))
    for i, mu in enumerate(prefix):
        needed = [j for j, size in enumerate(set_sizes) if size > i]
        if not needed:
            continue
        a = lift(domain, basis, _grid_parameter_point(mu, nodes, domain.active))
        obs = oracle.observe_vector(a, [output_modes[j] for j in needed])
        samples[i, needed] = obs

    metadata = dict(
        budget=str(N),
        variant=variant,
        alpha=repr(float(alpha)),
        beta=repr(float(beta)),
        config_hash=config_hash,
        created=datetime.now(timezone.utc).isoformat(),
    )
    return SurrogateModel(
        domain, basis, nodes, plan, tuple(prefix), output_modes, sets, samples, metadata
    )


def _y_space_weight(basis_out: FourierBasisSpec, t0: float) -> np.ndarray:
    return basis_out.scale(2 * t0)


def _difference_norm(u_true: FourierField, u_surr: FourierField, t0: float) -> float:
    """Output-space norm of the difference; fields may differ in truncation."""
    big = u_true if u_true.coeffs.size >= u_surr.coeffs.size else u_surr
    diff = np.zeros(big.coeffs.shape)
    sl_t = tuple(slice(0, n) for n in u_true.coeffs.shape)
    sl_s = tuple(slice(0, n) for n in u_surr.coeffs.shape)
    diff[sl_t] += u_true.coeffs
    diff[sl_s] -= u_surr.coeffs
    return float(np.sqrt(np.sum(diff**2 * big.basis.scale(2 * t0))))


def _tail_norm(u_true: FourierField, retained: List[Tuple[int, ...]], t0: float) -> float:
    """Output-space norm of the true solution outside the retained modes."""
    mask = np.ones(u_true.coeffs.shape, dtype=bool)
    for mode in retained:
        if all(m < n for m, n in zip(mode, u_true.coeffs.shape)):
            mask[tuple(mode)] = False
    c = u_true.coeffs * mask
    return float(np.sqrt(np.sum(c**2 * u_true.basis.scale(2 * t0))))


def _corner_points(n_act: int) -> List[np.ndarray]:
    corners = []
    for sign in (1.0, -1.0):
        corners.append(np.full(n_act, sign))
        e = np.zeros(n_act)
        e[0] = sign
        corners.append(e)
    if n_act >= 2:
        for s1 in (1.0, -1.0):
            for s2 in (1.0, -1.0):
                e = np.zeros(n_act)
                e[0], e[1] = s1, s2
                corners.append(e)
    return corners


def _error_samples(model: SurrogateModel, oracle, points: List[np.ndarray]):
    t0 = model.basis.t0
    errs = np.empty(len(points))
    tails = np.empty(len(points))
    for i, y in enumerate(points):
        a = lift(model.domain, model.basis, y)
        u_true = oracle.solve(a)
        u_surr = model.evaluate(a)
        errs[i] = _difference_norm(u_true, u_surr, t0)
        tails[i] = _tail_norm(u_true, model.output_modes, t0)
    return errs, tails


def worst_case_error(model: SurrogateModel, oracle, n_samples: int, seed: int) -> ErrorReport:
    """Sampled lower bound of the sup-norm operator error over the cube.

    Deterministic corner probes (full +-1 corners and +-1 on the first one
    or two dimensions) are always included; n_samples = 0 means corners
    only.
    """
    rng = np.random.default_rng(seed)
    points = _corner_points(model.domain.active)
    points += [sample_cube(model.domain, rng) for _ in range(n_samples)]
    errs, tails = _error_samples(model, oracle, points)
    k = int(np.argmax(errs))
    return ErrorReport(
        kind="worst-case",
        value=float(errs[k]),
        n_samples=n_samples,
        seed=seed,
        tail=float(tails.max()),
        argmax_y=points[k],
        errors=errs,
    )


def mean_square_error(model: SurrogateModel, oracle, n_samples: int, seed: int) -> ErrorReport:
    """Monte Carlo estimate of the L2 operator error under the cube measure.

    Reports the root-mean-square error together with a delta-method
    standard-error bar.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    rng = np.random.default_rng(seed)
    points = [sample_cube(model.domain, rng) for _ in range(n_samples)]
    errs, tails = _error_samples(model, oracle, points)
    msq = float(np.mean(errs**2))
    rms = math.sqrt(msq)
    se_msq = float(np.std(errs**2, ddof=1) / math.sqrt(n_samples)) if n_samples > 1 else 0.0
    se_rms = se_msq / (2.0 * rms) if rms > 0 else 0.0
    return ErrorReport(
        kind="mean-square",
        value=rms,
        n_samples=n_samples,
        seed=seed,
        tail=float(tails.max()),
        std_error=se_rms,
        errors=errs,
    )


def config_hash(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()[:16]
