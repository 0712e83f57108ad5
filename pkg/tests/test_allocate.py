"""Tests for the budget allocator and per-output index-set assembly."""

from math import ceil

import numpy as np
import pytest

from gpcop.allocate import (
    MEAN_SQUARE,
    WORST_CASE,
    AllocationPlan,
    allocate_mean_square,
    allocate_worst_case,
    budget_for,
    build_output_sets,
)
from gpcop.multiindex import MultiIndex

from test_multiindex import mi


def graded_enumeration(length):
    """One-dimensional enumeration 0, (1), (2), ...; prefixes trivially closed."""
    return [MultiIndex({1: k}) if k else MultiIndex() for k in range(length)]


class TestAllocateWorstCase:
    def test_trivial(self):
        plan = allocate_worst_case(1, 2.0, 1.0, 10)
        assert plan.m == (1,)
        assert plan.realized == 1

    def test_worked_example(self):
        plan = allocate_worst_case(4, 2.0, 1.0, 10)
        assert plan.m == (4, 2, 2, 1)
        assert plan.realized == 9

    def test_nonincreasing_and_sum(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            n = int(rng.integers(1, 200))
            alpha = float(rng.uniform(1.1, 4.0))
            beta = float(rng.uniform(0.3, 4.0))
            plan = allocate_worst_case(n, alpha, beta, 400)
            m = np.array(plan.m)
            assert np.all(np.diff(m) <= 0)
            assert m.sum() == plan.realized

    def test_validation(self):
        with pytest.raises(ValueError):
            allocate_worst_case(4, 1.0, 1.0, 10)
        with pytest.raises(ValueError):
            allocate_worst_case(4, 2.0, 0.0, 10)
        with pytest.raises(ValueError):
            allocate_worst_case(0, 2.0, 1.0, 10)

    def test_truncation_at_enumeration_length(self):
        plan = allocate_worst_case(8, 2.0, 1.0, 3)
        assert len(plan.m) == 3


class TestAllocateMeanSquare:
    def test_trivial(self):
        assert allocate_mean_square(1, 2.0, 1.0, 10).m == (1,)

    def test_unit_exponent_example(self):
        plan = allocate_mean_square(4, 1.5, 1.0, 10)
        assert plan.m == (4, 2, 2, 1)

    def test_exponent_formulas(self):
        rng = np.random.default_rng(1)
        for _ in range(40):
            n = int(rng.integers(2, 60))
            alpha = float(rng.uniform(1.1, 3.0))
            beta = float(rng.uniform(0.3, 3.0))
            wc = allocate_worst_case(n, alpha, beta, 100).m
            ms = allocate_mean_square(n, alpha, beta, 100).m
            e_wc = (alpha - 1.0) / beta
            e_ms = (2.0 * alpha - 1.0) / (2.0 * beta)
            for i in range(n):
                assert wc[i] == ceil((n / (i + 1)) ** e_wc - 1e-9)
                assert ms[i] == ceil((n / (i + 1)) ** e_ms - 1e-9)


class TestBudgetFor:
    def test_trivial(self):
        plan = budget_for(1, WORST_CASE, 2.0, 1.0)
        assert plan.n == 1 and plan.realized == 1

    def test_worked_example(self):
        plan = budget_for(9, WORST_CASE, 2.0, 1.0)
        assert plan.n == 4 and plan.realized == 9

    def test_never_exceeds_target(self):
        rng = np.random.default_rng(2)
        for _ in range(50):
            N = int(rng.integers(1, 500))
            alpha = float(rng.uniform(1.1, 3.0))
            beta = float(rng.uniform(0.3, 3.0))
            variant = WORST_CASE if rng.random() < 0.5 else MEAN_SQUARE
            plan = budget_for(N, variant, alpha, beta)
            assert plan.realized <= N

    def test_monotone_in_target(self):
        last = 0
        for N in (1, 3, 9, 27, 81):
            plan = budget_for(N, WORST_CASE, 2.0, 1.0)
            assert plan.n >= last
            last = plan.n

    def test_rejects_empty_budget(self):
        with pytest.raises(ValueError):
            budget_for(0, WORST_CASE, 2.0, 1.0)


class TestBuildOutputSets:
    def test_single(self):
        plan = AllocationPlan((1,), 1, WORST_CASE, 2.0, 1.0)
        sets = build_output_sets(graded_enumeration(1), plan)
        assert len(sets) == 1
        assert list(sets[0]) == [MultiIndex()]

    def test_worked_example(self):
        plan = AllocationPlan((4, 2, 2, 1), 4, WORST_CASE, 2.0, 1.0)
        sets = build_output_sets(graded_enumeration(4), plan)
        assert [len(s) for s in sets] == [4, 3, 1, 1]
        assert sum(len(s) for s in sets) == 9 == plan.realized

    def test_nested(self):
        plan = AllocationPlan((5, 3, 2, 2, 1), 5, WORST_CASE, 2.0, 1.0)
        sets = build_output_sets(graded_enumeration(5), plan)
        for a, b in zip(sets[1:], sets):
            assert set(a.indices) <= set(b.indices)

    def test_counting_identity_random(self):
        rng = np.random.default_rng(3)
        for _ in range(30):
            n = int(rng.integers(1, 40))
            plan = allocate_worst_case(n, float(rng.uniform(1.2, 3.0)), float(rng.uniform(0.5, 3.0)), 200)
            sets = build_output_sets(graded_enumeration(len(plan.m)), plan)
            assert sum(len(s) for s in sets) == plan.realized
            assert len(sets) == plan.m[0]

    def test_rejects_short_enumeration(self):
        plan = AllocationPlan((2, 1), 2, WORST_CASE, 2.0, 1.0)
        with pytest.raises(ValueError, match="plan needs"):
            build_output_sets(graded_enumeration(1), plan)

    def test_rejects_open_prefix(self):
        plan = AllocationPlan((3, 1, 1), 3, WORST_CASE, 2.0, 1.0)
        bad = [MultiIndex(), mi(2), mi(1)]
        with pytest.raises(ValueError, match="position 2"):
            build_output_sets(bad, plan)


class TestPlanPersistence:
    def test_csv(self, tmp_path):
        plan = allocate_worst_case(4, 2.0, 1.0, 10)
        path = tmp_path / "plan.csv"
        plan.to_csv(path)
        lines = path.read_text().splitlines()
        assert lines == ["i,m_i", "1,4", "2,2", "3,2", "4,1"]

    def test_support_and_set_size(self):
        plan = AllocationPlan((4, 2, 2, 1), 4, WORST_CASE, 2.0, 1.0)
        assert plan.support == 4
        assert [plan.set_size(j) for j in (1, 2, 3, 4)] == [4, 3, 1, 1]
