"""Budget allocation across output coordinates and per-output index sets.

Given a total observation budget N, the allocator distributes per-rank
counts m_i = ceil((n/i)^e) (e depending on the error functional) over the
enumeration of input multi-indices, and the first max{i : m_i >= j}
enumeration entries form the index set of output coordinate j.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from math import ceil
from typing import List, Sequence

from .multiindex import DownwardClosedSet, MultiIndex

log = logging.getLogger(__name__)

WORST_CASE = "worst-case"
MEAN_SQUARE = "mean-square"

# guard against ceil() picking up one spurious unit from float round-off
_CEIL_GUARD = 1e-9


@dataclass(frozen=True)
class AllocationPlan:
    """Nonincreasing per-rank budget counts with their provenance."""

    m: tuple
    n: int
    variant: str
    alpha: float
    beta: float

    @property
    def realized(self) -> int:
        """M = sum_i m_i, the observation count the plan actually spends."""
        return int(sum(self.m))

    @property
    def support(self) -> int:
        """Number of ranks with m_i >= 1 (equals the output-coordinate count)."""
        return sum(1 for v in self.m if v >= 1)

    def set_size(self, j: int) -> int:
        """|Lambda_j| = #{i : m_i >= j} for output coordinate j (1-based)."""
        return sum(1 for v in self.m if v >= j)

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("i,m_i\n")
            for i, v in enumerate(self.m, start=1):
                fh.write(f"{i},{v}\n")


def _validate(alpha: float, beta: float) -> None:
    if alpha <= 1.0:
        raise ValueError("alpha must be > 1")
    if beta <= 0.0:
        raise ValueError("beta must be > 0")


def _allocate(
    n: int,
    exponent: float,
    I: int,
    variant: str,
    alpha: float,
    beta: float,
    warn: bool = True,
) -> AllocationPlan:
    if n < 1:
        raise ValueError("n must be >= 1")
    if warn and n > I:
        log.warning("allocation support n=%d exceeds enumeration length I=%d; truncating", n, I)
    m = [ceil((n / i) ** exponent - _CEIL_GUARD) for i in range(1, min(n, I) + 1)]
    return AllocationPlan(tuple(m), n, variant, alpha, beta)


def allocate_worst_case(n: int, alpha: float, beta: float, I: int, warn: bool = True) -> AllocationPlan:
    """m_i = ceil((n/i)^{(alpha-1)/beta}) for i <= n, zero beyond, truncated at I."""
    _validate(alpha, beta)
    return _allocate(n, (alpha - 1.0) / beta, I, WORST_CASE, alpha, beta, warn)


def allocate_mean_square(n: int, alpha: float, beta: float, I: int, warn: bool = True) -> AllocationPlan:
    """Mean-square variant with exponent (2 alpha - 1) / (2 beta)."""
    _validate(alpha, beta)
    return _allocate(n, (2.0 * alpha - 1.0) / (2.0 * beta), I, MEAN_SQUARE, alpha, beta, warn)


def _allocator(variant: str):
    if variant == WORST_CASE:
        return allocate_worst_case
    if variant == MEAN_SQUARE:
        return allocate_mean_square
    raise ValueError(f"unknown allocation variant {variant!r}")


def budget_for(N_target: int, variant: str, alpha: float, beta: float, I: int | None = None) -> AllocationPlan:
    """Largest n whose realized cost M(n) stays within N_target.

    M(n) is nondecreasing in n, so a binary search applies; the returned
    plan never exceeds the budget (reported rates stay conservative in N).
    """
    if N_target < 1:
        raise ValueError("N_target must be >= 1")
    if I is None:
        I = N_target
    make = _allocator(variant)
    lo, hi = 1, N_target
    best = make(1, alpha, beta, I, warn=False)
    while lo <= hi:
        mid = (lo + hi) // 2
        plan = make(mid, alpha, beta, I, warn=False)
        if plan.realized <= N_target:
            best = plan
            lo = mid + 1
        else:
            hi = mid - 1
    if best.n > I:
        log.warning(
            "allocation support n=%d exceeds enumeration length I=%d; truncating", best.n, I
        )
    return best


def build_output_sets(enumeration: Sequence[MultiIndex], plan: AllocationPlan) -> List[DownwardClosedSet]:
    """Per-output index sets Lambda_j = {nu_i : m_i >= j} as enumeration prefixes.

    Requires every used prefix of the enumeration to be downward closed;
    the incremental check pinpoints the first violating entry.
    """
    n = len(plan.m)
    if len(enumeration) < n:
        raise ValueError(
            f"enumeration has {len(enumeration)} entries, plan needs {n}"
        )
    seen = set()
    for i, nu in enumerate(enumeration[:n]):
        for dim in nu.support:
            if nu.decrement(dim) not in seen:
                raise ValueError(
                    f"enumeration prefix not downward closed at position {i + 1} ({nu!r})"
                )
        seen.add(nu)

    sets = []
    m_max = plan.m[0] if plan.m else 0
    for j in range(1, m_max + 1):
        count = plan.set_size(j)
        sets.append(DownwardClosedSet(enumeration[:count]))
    return sets
