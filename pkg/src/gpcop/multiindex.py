"""Multi-indices, downward-closed sets and Smolyak combination coefficients.

Multi-indices are finitely supported maps from a 1-based dimension index to
a positive order; dimensions not stored have order zero.  Downward-closed
collections of multi-indices are the shape class for sparse polynomial
spaces and carry the enumeration order used by the budget allocator.
"""

from __future__ import annotations

from typing import Dict, Iterable, Iterator, List, Mapping, Tuple


class MultiIndex:
    """Immutable, finitely supported multi-index.

    Parameters
    ----------
    entries : mapping or iterable of (dim, order) pairs, optional
        Dimension indices are 1-based.  Zero orders are dropped; negative
        orders or dimensions < 1 are rejected.
    """

    __slots__ = ("_entries", "_hash")

    def __init__(self, entries: Mapping[int, int] | Iterable[Tuple[int, int]] | None = None):
        items: Dict[int, int] = {}
        if entries is not None:
            pairs = entries.items() if isinstance(entries, Mapping) else entries
            for dim, order in pairs:
                dim = int(dim)
                order = int(order)
                if dim < 1:
                    raise ValueError(f"dimension index must be >= 1, got {dim}")
                if order < 0:
                    raise ValueError(f"order must be >= 0, got {order}")
                if order > 0:
                    items[dim] = order
        self._entries: Tuple[Tuple[int, int], ...] = tuple(sorted(items.items()))
        self._hash = hash(self._entries)

    @classmethod
    def zero(cls) -> "MultiIndex":
        return cls()

    @classmethod
    def single(cls, dim: int, order: int = 1) -> "MultiIndex":
        return cls({dim: order})

    @classmethod
    def from_tuple(cls, orders: Iterable[int]) -> "MultiIndex":
        """Build from a dense tuple (dimension i+1 gets orders[i])."""
        return cls({i + 1: o for i, o in enumerate(orders)})

    @property
    def support(self) -> Tuple[int, ...]:
        """Sorted dimensions with nonzero order."""
        return tuple(d for d, _ in self._entries)

    @property
    def total_order(self) -> int:
        """|nu| = sum of all orders."""
        return sum(o for _, o in self._entries)

    @property
    def max_order(self) -> int:
        return max((o for _, o in self._entries), default=0)

    def order(self, dim: int) -> int:
        for d, o in self._entries:
            if d == dim:
                return o
        return 0

    def items(self) -> Tuple[Tuple[int, int], ...]:
        return self._entries

    def is_zero(self) -> bool:
        return not self._entries

    def increment(self, dim: int) -> "MultiIndex":
        d = dict(self._entries)
        d[dim] = d.get(dim, 0) + 1
        return MultiIndex(d)

    def decrement(self, dim: int) -> "MultiIndex":
        d = dict(self._entries)
        if d.get(dim, 0) < 1:
            raise ValueError(f"cannot decrement dimension {dim} of {self}")
        d[dim] -= 1
        return MultiIndex(d)

    def dense(self, ndim: int) -> Tuple[int, ...]:
        """Orders for dimensions 1..ndim as a dense tuple."""
        return tuple(self.order(d) for d in range(1, ndim + 1))

    def __eq__(self, other) -> bool:
        return isinstance(other, MultiIndex) and self._entries == other._entries

    def __hash__(self) -> int:
        return self._hash

    def __iter__(self) -> Iterator[Tuple[int, int]]:
        return iter(self._entries)

    def __repr__(self) -> str:
        body = ", ".join(f"{d}:{o}" for d, o in self._entries)
        return f"MultiIndex({{{body}}})"

    # line format used in the surrogate-model file: "dim:order" pairs,
    # blank line encodes the zero index
    def to_line(self) -> str:
        return " ".join(f"{d}:{o}" for d, o in self._entries)

    @classmethod
    def from_line(cls, line: str) -> "MultiIndex":
        line = line.strip()
        if not line:
            return cls()
        pairs = []
        for tok in line.split():
            d, o = tok.split(":")
            pairs.append((int(d), int(o)))
        return cls(pairs)


def leq(mu: MultiIndex, nu: MultiIndex) -> bool:
    """Componentwise order: mu <= nu iff mu_j <= nu_j for every j."""
    return all(nu.order(d) >= o for d, o in mu)


def omega(nu: MultiIndex) -> int:
    """prod_{j in supp nu} (1 + 2 nu_j); the empty product is 1."""
    out = 1
    for _, o in nu:
        out *= 1 + 2 * o
    return out


def is_downward_closed(indices: Iterable[MultiIndex]) -> bool:
    """Check closure under coordinate decrements.

    The local criterion (nu - e_j present for every active j of every nu)
    is equivalent to full downward closure.
    """
    pool = set(indices)
    for nu in pool:
        for dim in nu.support:
            if nu.decrement(dim) not in pool:
                return False
    return True


def closure(indices: Iterable[MultiIndex]) -> List[MultiIndex]:
    """Downward closure of a finite set, ordered by (|nu|, dense lex)."""
    seen = set()
    stack = list(indices)
    while stack:
        nu = stack.pop()
        if nu in seen:
            continue
        seen.add(nu)
        for dim in nu.support:
            stack.append(nu.decrement(dim))
    ndim = max((nu.support[-1] for nu in seen if nu.support), default=0)
    return sorted(seen, key=lambda nu: (nu.total_order, nu.dense(ndim)))


class DownwardClosedSet:
    """Ordered, duplicate-free, downward-closed collection of multi-indices.

    Insertion order is the enumeration order; constructors that build sets
    from priority functions must insert in nonincreasing priority.
    """

    def __init__(self, indices: Iterable[MultiIndex]):
        indices = list(indices)
        if len(set(indices)) != len(indices):
            raise ValueError("duplicate multi-indices")
        if indices and not is_downward_closed(indices):
            raise ValueError("index set is not downward closed")
        self._indices: Tuple[MultiIndex, ...] = tuple(indices)
        self._members = frozenset(indices)

    @property
    def indices(self) -> Tuple[MultiIndex, ...]:
        return self._indices

    def __len__(self) -> int:
        return len(self._indices)

    def __iter__(self) -> Iterator[MultiIndex]:
        return iter(self._indices)

    def __contains__(self, nu: MultiIndex) -> bool:
        return nu in self._members

    def __eq__(self, other) -> bool:
        return isinstance(other, DownwardClosedSet) and self._indices == other._indices

    def __repr__(self) -> str:
        return f"DownwardClosedSet({list(self._indices)!r})"

    def max_degree(self) -> int:
        """Largest single coordinate over all stored indices."""
        return max((nu.max_order for nu in self._indices), default=0)

    def active_dims(self) -> int:
        """Number of dimensions active in at least one index."""
        return len(self.dims())

    def dims(self) -> Tuple[int, ...]:
        dims = set()
        for nu in self._indices:
            dims.update(nu.support)
        return tuple(sorted(dims))

    def to_lines(self) -> List[str]:
        return [nu.to_line() for nu in self._indices]

    @classmethod
    def from_lines(cls, lines: Iterable[str]) -> "DownwardClosedSet":
        return cls(MultiIndex.from_line(ln) for ln in lines)


def max_degree(lam: DownwardClosedSet) -> int:
    return lam.max_degree()


def active_dims(lam: DownwardClosedSet) -> int:
    return lam.active_dims()


def combination_coefficients(lam: DownwardClosedSet) -> Dict[MultiIndex, int]:
    """Smolyak combination coefficients of a downward closed set.

    For each nu the coefficient is the signed count of binary shifts e with
    nu + e still inside the set.  Entries that telescope to zero are
    dropped.  Enumeration of shifts is pruned using downward closure: once
    nu + 1_S leaves the set, no superset of S can re-enter it.
    """
    coeffs: Dict[MultiIndex, int] = {}
    dims = lam.dims()
    for nu in lam:
        candidate_dims = [d for d in dims if nu.increment(d) in lam]

        def count(pos: int, current: MultiIndex, sign: int) -> int:
            if pos == len(candidate_dims):
                return sign
            total = count(pos + 1, current, sign)
            bumped = current.increment(candidate_dims[pos])
            if bumped in lam:
                total += count(pos + 1, bumped, -sign)
            return total

        c = count(0, nu, 1)
        if c != 0:
            coeffs[nu] = c
    return coeffs
