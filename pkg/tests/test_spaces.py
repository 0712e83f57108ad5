"""Tests for the Fourier function-space layer, cube domain and lift."""

import numpy as np
import pytest

from gpcop.spaces import (
    CubeDomain,
    FourierBasisSpec,
    FourierField,
    MembershipError,
    WeightSequence,
    decode,
    encode,
    lift,
    mode_frequency,
    rescale,
    sample_cube,
)


def random_field(basis, rng, decay=0.0):
    coeffs = rng.standard_normal(basis.shape) * basis.scale(-decay)
    return FourierField(basis, coeffs)


class TestBasisSpec:
    def test_invariant_checks(self):
        with pytest.raises(ValueError):
            FourierBasisSpec(4, 2)
        with pytest.raises(ValueError):
            FourierBasisSpec(1, -1)
        with pytest.raises(ValueError):
            FourierBasisSpec(1, 2, s0=-0.5)
        with pytest.raises(ValueError):
            FourierBasisSpec(1, 2, t0=2.0)

    def test_mode_frequency(self):
        assert [mode_frequency(j) for j in range(5)] == [0, 1, 1, 2, 2]

    def test_orthonormality_by_quadrature(self):
        # columns of the synthesis matrix are L2([0,1])-orthonormal
        for M in (1, 3):
            basis = FourierBasisSpec(1, M)
            n = 8 * M + 4
            B = basis.synthesis_matrix(n)
            gram = B.T @ B / n
            np.testing.assert_allclose(gram, np.eye(2 * M + 1), atol=1e-12)

    def test_mode_order_sorted_by_modulus_then_lex(self):
        basis = FourierBasisSpec(2, 1)
        assert basis.mode_order[0] == (0, 0)
        moduli = [np.hypot(*m) for m in basis.mode_order]
        assert moduli == sorted(moduli)
        assert basis.mode_order[1] == (0, 1) and basis.mode_order[2] == (1, 0)

    def test_ordered_unordered_roundtrip(self):
        basis = FourierBasisSpec(2, 2)
        rng = np.random.default_rng(0)
        c = rng.standard_normal(basis.shape)
        np.testing.assert_array_equal(basis.unordered(basis.ordered(c)), c)

    def test_mode_rank(self):
        basis = FourierBasisSpec(1, 3)
        for i, mode in enumerate(basis.mode_order):
            assert basis.mode_rank(mode) == i + 1


class TestFourierField:
    def test_shape_check(self):
        basis = FourierBasisSpec(1, 2)
        with pytest.raises(ValueError):
            FourierField(basis, np.zeros(3))

    def test_parseval(self):
        basis = FourierBasisSpec(1, 4)
        rng = np.random.default_rng(1)
        u = random_field(basis, rng)
        vals = u.values(8 * 4 + 4)
        l2sq = float(np.mean(vals**2))
        assert l2sq == pytest.approx(float(np.sum(u.coeffs**2)), rel=1e-12)

    def test_values_analysis_roundtrip(self):
        for d in (1, 2):
            basis = FourierBasisSpec(d, 3)
            rng = np.random.default_rng(d)
            u = random_field(basis, rng)
            v = FourierField.from_values(basis, u.values(4 * 3 + 2))
            np.testing.assert_allclose(v.coeffs, u.coeffs, atol=1e-12)

    def test_hs_norm_constant(self):
        basis = FourierBasisSpec(1, 3)
        c = np.zeros(basis.shape)
        c[0] = 1.0
        u = FourierField(basis, c)
        for s in (0.0, 1.0, 2.5):
            assert u.hs_norm(s) == pytest.approx(1.0)

    def test_hs_norm_single_mode(self):
        basis = FourierBasisSpec(1, 2)
        c = np.zeros(basis.shape)
        c[3] = 1.0  # |j| = 3
        assert FourierField(basis, c).hs_norm(2.0) == pytest.approx(9.0)

    def test_arithmetic(self):
        basis = FourierBasisSpec(1, 2)
        rng = np.random.default_rng(3)
        u, v = random_field(basis, rng), random_field(basis, rng)
        np.testing.assert_allclose((u + v - v).coeffs, u.coeffs, atol=1e-14)
        np.testing.assert_allclose((2.0 * u).coeffs, u.coeffs * 2)

    def test_csv_roundtrip(self, tmp_path):
        basis = FourierBasisSpec(2, 2)
        u = random_field(basis, np.random.default_rng(4))
        path = tmp_path / "field.csv"
        u.to_csv(path)
        v = FourierField.from_csv(basis, path)
        np.testing.assert_array_equal(v.coeffs, u.coeffs)

    def test_csv_dim_mismatch(self, tmp_path):
        u = random_field(FourierBasisSpec(2, 1), np.random.default_rng(5))
        path = tmp_path / "field.csv"
        u.to_csv(path)
        with pytest.raises(ValueError):
            FourierField.from_csv(FourierBasisSpec(1, 1), path)


class TestEncodeDecode:
    def test_encode_unit_mode(self):
        basis = FourierBasisSpec(1, 2, s0=2.0)
        c = np.zeros(basis.shape)
        c[3] = 1.0
        out = encode(basis, FourierField(basis, c))
        expected = np.zeros(basis.n_modes)
        expected[3] = 3.0**2
        np.testing.assert_allclose(out, expected)

    def test_encode_zero(self):
        basis = FourierBasisSpec(1, 2)
        assert not encode(basis, FourierField(basis)).any()

    def test_decode_unit_vector(self):
        basis = FourierBasisSpec(1, 2, t0=1.0)
        c = np.zeros(basis.n_modes)
        c[2] = 1.0
        u = decode(basis, c)
        assert u.coeffs[2] == pytest.approx(1.0 / 2.0)  # eta scaling max(1,2)^{-1}

    def test_roundtrip_when_scales_match(self):
        basis = FourierBasisSpec(2, 2, s0=0.7, t0=0.7)
        u = random_field(basis, np.random.default_rng(6))
        v = decode(basis, encode(basis, u))
        np.testing.assert_allclose(v.coeffs, u.coeffs, rtol=1e-12, atol=1e-12)

    def test_decode_isometry(self):
        basis = FourierBasisSpec(1, 3, t0=1.0)
        rng = np.random.default_rng(7)
        c = rng.standard_normal(basis.n_modes)
        u = decode(basis, c)
        assert u.hs_norm(basis.t0) == pytest.approx(float(np.linalg.norm(c)), rel=1e-12)

    def test_decode_rejects_overflow(self):
        basis = FourierBasisSpec(1, 1)
        with pytest.raises(ValueError):
            decode(basis, np.ones(10))

    def test_encode_basis_mismatch(self):
        u = FourierField(FourierBasisSpec(1, 3))
        with pytest.raises(ValueError):
            encode(FourierBasisSpec(1, 2), u)

    def test_xs_norm_equals_sobolev_norm(self):
        # weighted-l2 norm of encoded coefficients = H^{s0+s d} norm
        basis = FourierBasisSpec(2, 2, s0=1.2)
        w = WeightSequence(2)
        u = random_field(basis, np.random.default_rng(8))
        s = 1.7
        c = encode(basis, u)
        xs = float(np.sqrt(np.sum(c**2 * w.weights_for(basis) ** (-2 * s))))
        assert xs == pytest.approx(u.hs_norm(basis.s0 + s * basis.dim), rel=1e-12)


class TestWeightSequence:
    def test_nonincreasing_along_enumeration(self):
        for d in (1, 2, 3):
            basis = FourierBasisSpec(d, 2)
            w = WeightSequence(d).weights_for(basis)
            assert np.all(np.diff(w) <= 1e-15)
            assert np.all(w > 0)

    def test_default_decay_is_dimension(self):
        assert WeightSequence(2).exponent == 2.0
        assert WeightSequence(2, 3.5).exponent == 3.5

    def test_summability_partial_sums_stabilize(self):
        # (w_j^{1+eps}) summable: partial sums flatten at desk scale
        basis = FourierBasisSpec(1, 64)
        w = WeightSequence(1).weights_for(basis)
        partial = np.cumsum(w**1.5)
        assert partial[-1] - partial[len(w) // 2] < 0.05 * partial[-1]


class TestCubeDomain:
    def setup_method(self):
        self.basis = FourierBasisSpec(1, 4, s0=1.0)
        self.domain = CubeDomain(0.5, 2.0, WeightSequence(1), 5)

    def test_validation(self):
        w = WeightSequence(1)
        with pytest.raises(ValueError):
            CubeDomain(0.0, 2.0, w, 3)
        with pytest.raises(ValueError):
            CubeDomain(1.0, 1.0, w, 3)
        with pytest.raises(ValueError):
            CubeDomain(1.0, 2.0, w, 0)

    def test_radii(self):
        w = WeightSequence(1).weights_for(self.basis)[:5]
        np.testing.assert_allclose(self.domain.radii(self.basis), 0.5 * w**2)

    def test_lift_zero(self):
        u = lift(self.domain, self.basis, np.zeros(5))
        assert not u.coeffs.any()

    def test_lift_first_coordinate(self):
        y = np.zeros(5)
        y[0] = 1.0
        u = lift(self.domain, self.basis, y)
        # r * w_1^s * psi_1 with w_1 = 1 and psi_1 = xi_1 (|j| = 0 mode)
        expected = np.zeros(self.basis.shape)
        expected[0] = 0.5
        np.testing.assert_allclose(u.coeffs, expected)

    def test_encode_lift_identity(self):
        rng = np.random.default_rng(9)
        y = rng.uniform(-1, 1, 5)
        c = encode(self.basis, lift(self.domain, self.basis, y))
        np.testing.assert_allclose(c[:5], self.domain.radii(self.basis) * y, atol=1e-15)
        assert not c[5:].any()

    def test_lift_rejects_out_of_range(self):
        y = np.zeros(5)
        y[2] = 1.5
        with pytest.raises(MembershipError, match="coordinate 3"):
            lift(self.domain, self.basis, y)

    def test_lift_norm_bound(self):
        rng = np.random.default_rng(10)
        w = WeightSequence(1).weights_for(self.basis)
        bound = 0.5 * float(np.sqrt(np.sum(w ** (2 * 2.0))))
        for _ in range(20):
            y = rng.uniform(-1, 1, 5)
            u = lift(self.domain, self.basis, y)
            assert float(np.linalg.norm(encode(self.basis, u))) <= bound + 1e-12

    def test_rescale_inverse(self):
        rng = np.random.default_rng(11)
        y = rng.uniform(-1, 1, 5)
        c = encode(self.basis, lift(self.domain, self.basis, y))
        np.testing.assert_allclose(rescale(self.domain, self.basis, c), y, atol=1e-12)

    def test_rescale_zero_and_boundary(self):
        assert not rescale(self.domain, self.basis, np.zeros(5)).any()
        c = self.domain.radii(self.basis).copy()
        np.testing.assert_allclose(rescale(self.domain, self.basis, c), np.ones(5))

    def test_rescale_violation_reports_index(self):
        c = np.zeros(5)
        c[1] = 10.0
        with pytest.raises(MembershipError, match="coefficient 2"):
            rescale(self.domain, self.basis, c)

    def test_ball_inside_cube(self):
        # fields in the X^s ball of radius r satisfy the cube bounds
        rng = np.random.default_rng(12)
        w = WeightSequence(1).weights_for(self.basis)
        for _ in range(20):
            u = random_field(self.basis, rng)
            c = encode(self.basis, u)
            xs = float(np.sqrt(np.sum(c**2 * w ** (-2 * 2.0))))
            c *= 0.5 / xs  # scale onto the ball boundary
            assert np.all(np.abs(c) <= 0.5 * w**2.0 + 1e-15)

    def test_truncation_bias(self):
        w = WeightSequence(1).weights_for(self.basis)[5:]
        expected = 0.5 * float(np.sqrt(np.sum(w**4)))
        assert self.domain.truncation_bias(self.basis) == pytest.approx(expected)


class TestSampleCube:
    def test_deterministic(self):
        domain = CubeDomain(1.0, 2.0, WeightSequence(1), 4)
        np.testing.assert_array_equal(sample_cube(domain, 42), sample_cube(domain, 42))

    def test_range_and_shape(self):
        domain = CubeDomain(1.0, 2.0, WeightSequence(1), 7)
        y = sample_cube(domain, 0)
        assert y.shape == (7,)
        assert np.all(np.abs(y) <= 1.0)

    def test_empirical_mean(self):
        domain = CubeDomain(1.0, 2.0, WeightSequence(1), 1)
        rng = np.random.default_rng(13)
        draws = np.array([sample_cube(domain, rng)[0] for _ in range(10_000)])
        assert abs(draws.mean()) < 0.03
