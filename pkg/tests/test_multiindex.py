"""Tests for multi-index arithmetic and combination coefficients."""

import itertools

import numpy as np
import pytest

from gpcop.multiindex import (
    DownwardClosedSet,
    MultiIndex,
    active_dims,
    closure,
    combination_coefficients,
    is_downward_closed,
    leq,
    max_degree,
    omega,
)


def mi(*orders):
    return MultiIndex.from_tuple(orders)


def random_downward_closed(rng, size, ndim):
    """Grow a downward-closed set by repeatedly adding admissible children."""
    members = [MultiIndex()]
    pool = set(members)
    while len(members) < size:
        nu = members[rng.integers(len(members))]
        d = int(rng.integers(1, ndim + 1))
        child = nu.increment(d)
        if child in pool:
            continue
        if all(child.decrement(j) in pool for j in child.support):
            members.append(child)
            pool.add(child)
    return members


class TestMultiIndex:
    def test_zero_orders_never_stored(self):
        assert mi(0, 0, 0) == MultiIndex()
        assert MultiIndex({3: 0, 1: 2}).items() == ((1, 2),)

    def test_equality_is_map_equality(self):
        assert MultiIndex({1: 2, 3: 1}) == MultiIndex([(3, 1), (1, 2)])
        assert mi(1) != mi(0, 1)

    def test_rejects_bad_entries(self):
        with pytest.raises(ValueError):
            MultiIndex({0: 1})
        with pytest.raises(ValueError):
            MultiIndex({1: -1})

    def test_support_and_orders(self):
        nu = MultiIndex({2: 3, 5: 1})
        assert nu.support == (2, 5)
        assert nu.total_order == 4
        assert nu.max_order == 3
        assert nu.order(2) == 3 and nu.order(4) == 0
        assert nu.dense(5) == (0, 3, 0, 0, 1)

    def test_increment_decrement(self):
        nu = mi(1).increment(3)
        assert nu == MultiIndex({1: 1, 3: 1})
        assert nu.decrement(1) == MultiIndex({3: 1})
        with pytest.raises(ValueError):
            MultiIndex().decrement(1)

    def test_line_roundtrip(self):
        for nu in (MultiIndex(), mi(2), MultiIndex({1: 2, 3: 1})):
            assert MultiIndex.from_line(nu.to_line()) == nu
        assert MultiIndex.from_line("1:2 3:1") == MultiIndex({1: 2, 3: 1})
        assert MultiIndex().to_line() == ""


class TestLeq:
    def test_zero_is_minimal(self):
        for nu in (MultiIndex(), mi(3), mi(1, 2, 0, 4)):
            assert leq(MultiIndex(), nu)

    def test_reflexive(self):
        nu = mi(1, 3)
        assert leq(nu, nu)

    def test_incomparable_pair(self):
        assert not leq(mi(2, 0), mi(1, 3))
        assert not leq(mi(1, 3), mi(2, 0))


class TestOmega:
    def test_values(self):
        assert omega(MultiIndex()) == 1
        assert omega(mi(1)) == 3
        assert omega(mi(2, 0, 1)) == 15

    def test_monotone(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            nu = MultiIndex({int(d): int(o) for d, o in zip(rng.integers(1, 6, 3), rng.integers(0, 4, 3))})
            # shrink one coordinate to get mu <= nu
            mu = nu
            for d in nu.support:
                mu = mu.decrement(d) if rng.random() < 0.5 else mu
            assert leq(mu, nu)
            assert omega(mu) <= omega(nu)


class TestDownwardClosed:
    def test_singleton_zero(self):
        assert is_downward_closed([MultiIndex()])

    def test_one_dim_gap(self):
        assert is_downward_closed([MultiIndex(), mi(1), mi(2)])
        assert not is_downward_closed([MultiIndex(), mi(2)])

    def test_two_dim_square_brute_force(self):
        indices = [MultiIndex(), mi(1, 0), mi(0, 1), mi(1, 1)]
        assert is_downward_closed(indices)
        # brute force: every mu <= nu is present
        pool = set(indices)
        for nu in indices:
            dense = nu.dense(2)
            for dmu in itertools.product(*(range(o + 1) for o in dense)):
                assert MultiIndex.from_tuple(dmu) in pool

    def test_local_criterion_matches_brute_force(self):
        rng = np.random.default_rng(11)
        for _ in range(30):
            members = random_downward_closed(rng, 12, 3)
            if rng.random() < 0.5 and len(members) > 1:
                # puncture the set: drop a non-maximal element
                victim = members[rng.integers(1, len(members))]
                sub = [nu for nu in members if nu != victim]
                has_child = any(leq(victim, nu) for nu in sub)
                assert is_downward_closed(sub) == (not has_child)
            else:
                assert is_downward_closed(members)

    def test_closure(self):
        closed = closure([mi(2, 1)])
        assert len(closed) == 6
        assert is_downward_closed(closed)
        assert closed[0] == MultiIndex()

    def test_set_validates(self):
        with pytest.raises(ValueError):
            DownwardClosedSet([MultiIndex(), mi(2)])
        with pytest.raises(ValueError):
            DownwardClosedSet([MultiIndex(), mi(1), mi(1)])

    def test_set_preserves_insertion_order(self):
        order = [MultiIndex(), mi(1), mi(0, 1), mi(2)]
        lam = DownwardClosedSet(order)
        assert list(lam) == order
        assert mi(0, 1) in lam and mi(3) not in lam

    def test_lines_roundtrip(self):
        lam = DownwardClosedSet([MultiIndex(), mi(1), mi(1, 1)][:2])
        assert DownwardClosedSet.from_lines(lam.to_lines()) == lam


class TestDiagnostics:
    def test_max_degree_active_dims(self):
        assert (max_degree(DownwardClosedSet([MultiIndex()])), active_dims(DownwardClosedSet([MultiIndex()]))) == (0, 0)
        lam = DownwardClosedSet(closure([mi(3)]))
        assert (max_degree(lam), active_dims(lam)) == (3, 1)
        lam = DownwardClosedSet([MultiIndex(), mi(1, 0), mi(0, 1), mi(1, 1)])
        assert (max_degree(lam), active_dims(lam)) == (1, 2)


def brute_combination_coefficients(lam):
    """Independent oracle: enumerate all binary shifts on the active dims."""
    dims = lam.dims()
    out = {}
    for nu in lam:
        c = 0
        for bits in itertools.product((0, 1), repeat=len(dims)):
            shifted = nu
            for d, b in zip(dims, bits):
                if b:
                    shifted = shifted.increment(d)
            if shifted in lam:
                c += (-1) ** sum(bits)
        if c != 0:
            out[nu] = c
    return out


class TestCombinationCoefficients:
    def test_singleton(self):
        lam = DownwardClosedSet([MultiIndex()])
        assert combination_coefficients(lam) == {MultiIndex(): 1}

    def test_two_point_chain(self):
        lam = DownwardClosedSet([MultiIndex(), mi(1)])
        assert combination_coefficients(lam) == {mi(1): 1}

    def test_cross(self):
        lam = DownwardClosedSet([MultiIndex(), mi(1, 0), mi(0, 1)])
        assert combination_coefficients(lam) == {
            MultiIndex(): -1,
            mi(1, 0): 1,
            mi(0, 1): 1,
        }

    def test_against_brute_force(self):
        rng = np.random.default_rng(7)
        for _ in range(25):
            lam = DownwardClosedSet(random_downward_closed(rng, 15, 4))
            assert combination_coefficients(lam) == brute_combination_coefficients(lam)

    def test_sum_is_one(self):
        rng = np.random.default_rng(19)
        for _ in range(20):
            lam = DownwardClosedSet(random_downward_closed(rng, 20, 3))
            assert sum(combination_coefficients(lam).values()) == 1

    def test_maximal_indices_have_unit_coefficient(self):
        rng = np.random.default_rng(23)
        for _ in range(20):
            lam = DownwardClosedSet(random_downward_closed(rng, 15, 3))
            coeffs = combination_coefficients(lam)
            for nu in lam:
                maximal = all(nu.increment(d) not in lam for d in lam.dims())
                if maximal:
                    assert coeffs[nu] == 1
