import numpy as np
import pytest

from asymde.densities import BinaryPair, DiscreteDensity, MessageAlphabet
from asymde.deviations import (
    AdditiveDeviation,
    BitFlipModel,
    apply_pi,
    build_pi_sign_magnitude,
    gallager_b_noise,
    sample_bit_flips,
    sample_deviation,
    sample_hard_flips,
)


def flip_oracle(value, q, eps01, eps10, rng):
    """Independent per-bit flipper written directly from the word layout.

    Matches the balanced +-0 convention: a zero value stores a coin-flip
    sign bit.
    """
    t = 2 ** (q - 1) - 1
    if value == 0:
        sign = int(rng.random() < 0.5)
    else:
        sign = 1 if value < 0 else 0
    mag = abs(value)
    bits = [sign] + [(mag >> j) & 1 for j in range(q - 1)]
    noisy = []
    for b in bits:
        p = eps10 if b == 1 else eps01
        noisy.append(b ^ (rng.random() < p))
    new_sign = noisy[0]
    new_mag = sum(b << j for j, b in enumerate(noisy[1:]))
    return (-1 if new_sign else 1) * new_mag


class TestTransitionMatrix:
    def test_identity_when_noiseless(self):
        pi = build_pi_sign_magnitude(4, BitFlipModel(0.0, 0.0))
        assert pi.is_identity

    def test_q2_hand_enumeration_positive_zero(self):
        # Zero stored with sign bit 0: enumerate the four noisy patterns
        # of (sign, magnitude); negative zero decodes back to 0.
        e = 0.2
        pi = build_pi_sign_magnitude(2, BitFlipModel(e, 0.0), zero_sign="positive")
        row0 = pi.matrix[pi.alphabet.pos(0)]
        assert row0[pi.alphabet.pos(0)] == pytest.approx((1 - e) ** 2 + e * (1 - e))
        assert row0[pi.alphabet.pos(1)] == pytest.approx((1 - e) * e)
        assert row0[pi.alphabet.pos(-1)] == pytest.approx(e**2)

    def test_q2_balanced_zero(self):
        # The default averages the two encodings of the aliased zero.
        e01, e10 = 0.2, 0.05
        pi = build_pi_sign_magnitude(2, BitFlipModel(e01, e10))
        row0 = pi.matrix[pi.alphabet.pos(0)]
        plus = 0.5 * (1 - e01) * e01 + 0.5 * e10 * e01  # noisy (0, 1)
        minus = 0.5 * e01 * e01 + 0.5 * (1 - e10) * e01  # noisy (1, 1)
        assert row0[pi.alphabet.pos(1)] == pytest.approx(plus, abs=1e-15)
        assert row0[pi.alphabet.pos(-1)] == pytest.approx(minus, abs=1e-15)

    def test_nonzero_rows_unaffected_by_zero_convention(self):
        model = BitFlipModel(0.07, 0.002)
        a = build_pi_sign_magnitude(3, model).matrix
        b = build_pi_sign_magnitude(3, model, zero_sign="positive").matrix
        zero_row = 3
        mask = np.ones(7, dtype=bool)
        mask[zero_row] = False
        assert np.array_equal(a[mask], b[mask])
        assert not np.allclose(a[zero_row], b[zero_row], atol=1e-12)

    def test_rows_sum_to_one(self):
        pi = build_pi_sign_magnitude(5, BitFlipModel(0.03, 0.007))
        assert np.allclose(pi.matrix.sum(axis=1), 1.0, atol=1e-12)
        assert np.all(pi.matrix >= 0)

    def test_row_matches_sampling_oracle(self):
        q, e01, e10 = 3, 0.1, 0.03
        pi = build_pi_sign_magnitude(q, BitFlipModel(e01, e10))
        rng = np.random.default_rng(11)
        n = 200_000
        for clean in (-3, 0, 2):
            counts = np.zeros(pi.alphabet.size)
            for _ in range(n):
                counts[pi.alphabet.pos(flip_oracle(clean, q, e01, e10, rng))] += 1
            emp = counts / n
            row = pi.matrix[pi.alphabet.pos(clean)]
            sigma = np.sqrt(np.maximum(row * (1 - row), 1e-12) / n)
            assert np.all(np.abs(emp - row) <= 3.5 * sigma + 1e-9)

    def test_symmetric_rates_give_sign_flip_symmetry(self):
        pi = build_pi_sign_magnitude(4, BitFlipModel(0.02, 0.02)).matrix
        assert np.allclose(pi, pi[::-1, ::-1], atol=1e-15)

    def test_asymmetric_rates_break_it(self):
        pi = build_pi_sign_magnitude(4, BitFlipModel(0.02, 0.0005)).matrix
        assert not np.allclose(pi, pi[::-1, ::-1], atol=1e-9)


class TestApplyPi:
    def test_identity(self):
        pi = build_pi_sign_magnitude(3, BitFlipModel(0.0, 0.0))
        d = DiscreteDensity.uniform_on(pi.alphabet, [-2, 0, 1])
        assert np.allclose(apply_pi(pi, d).mass, d.mass, atol=1e-15)

    def test_delta_selects_row(self):
        pi = build_pi_sign_magnitude(3, BitFlipModel(0.05, 0.01))
        for k in (-3, 0, 2):
            out = apply_pi(pi, DiscreteDensity.delta(pi.alphabet, k))
            assert np.allclose(out.mass, pi.matrix[pi.alphabet.pos(k)], atol=1e-14)

    def test_not_idempotent(self):
        pi = build_pi_sign_magnitude(3, BitFlipModel(0.05, 0.01))
        d = DiscreteDensity.delta(pi.alphabet, 3)
        once = apply_pi(pi, d)
        twice = apply_pi(pi, once)
        assert not np.allclose(once.mass, twice.mass, atol=1e-9)

    def test_mass_preserved(self):
        pi = build_pi_sign_magnitude(4, BitFlipModel(0.2, 0.1))
        rng = np.random.default_rng(0)
        mass = rng.random(pi.alphabet.size)
        mass /= mass.sum()
        out = mass @ pi.matrix
        assert out.sum() == pytest.approx(1.0, abs=1e-12)


class TestGallagerBNoise:
    def test_certain_zero(self):
        out = gallager_b_noise(BinaryPair(0.0, 0.0), BitFlipModel(0.3, 0.1))
        # Q(0)=1 in both conditions: noisy law keeps 0 w.p. 1 - eps01.
        assert out.p1_given0 == pytest.approx(0.3)
        assert out.p1_given1 == pytest.approx(0.3)

    def test_noiseless_identity(self):
        p = BinaryPair(0.3, 0.8)
        out = gallager_b_noise(p, BitFlipModel(0.0, 0.0))
        assert out == p

    def test_arithmetic_example(self):
        # Q_0(1)=0.3, eps01=1e-2, eps10=1e-4: Qtilde_0(0) = 1e-4*0.3 + 0.99*0.7.
        out = gallager_b_noise(BinaryPair(0.3, 0.5), BitFlipModel(1e-2, 1e-4))
        assert 1.0 - out.p1_given0 == pytest.approx(0.69303, abs=1e-12)

    def test_asymmetry_witness(self):
        p = BinaryPair(0.2, 0.9)
        out = gallager_b_noise(p, BitFlipModel(1e-2, 1e-4))
        assert abs((1.0 - out.p1_given0) - out.p1_given1) > 1e-4


class TestSampling:
    def test_noiseless_is_identity(self):
        rng = np.random.default_rng(0)
        vals = rng.integers(-7, 8, 1000)
        out = sample_bit_flips(vals, 4, BitFlipModel(0.0, 0.0), rng)
        assert np.array_equal(out, vals)

    def test_empirical_matches_matrix_row(self):
        q, model = 3, BitFlipModel(0.08, 0.02)
        pi = build_pi_sign_magnitude(q, model)
        rng = np.random.default_rng(5)
        n = 1_000_000
        clean = np.full(n, 2)
        out = sample_bit_flips(clean, q, model, rng)
        emp = np.bincount(out + pi.alphabet.max_index, minlength=pi.alphabet.size) / n
        row = pi.matrix[pi.alphabet.pos(2)]
        sigma = np.sqrt(np.maximum(row * (1 - row), 1e-12) / n)
        assert np.all(np.abs(emp - row) <= 3.5 * sigma + 1e-9)

    def test_hard_flips(self):
        rng = np.random.default_rng(1)
        bits = rng.integers(0, 2, 1_000_000)
        out = sample_hard_flips(bits, BitFlipModel(0.1, 0.02), rng)
        p01 = (out[bits == 0] == 1).mean()
        p10 = (out[bits == 1] == 0).mean()
        assert p01 == pytest.approx(0.1, abs=3 * np.sqrt(0.1 * 0.9 / 5e5))
        assert p10 == pytest.approx(0.02, abs=3 * np.sqrt(0.02 * 0.98 / 5e5))


class TestSampleDeviationDispatch:
    def test_noiseless_identity(self):
        rng = np.random.default_rng(0)
        vals = rng.integers(-3, 4, 100)
        out = sample_deviation(vals, BitFlipModel(0.0, 0.0), rng, q=3)
        assert np.array_equal(out, vals)

    def test_additive_adds_draws(self):
        dev = AdditiveDeviation("gaussian", mean=2.0, var=0.0)
        vals = np.array([0.0, -1.5, 3.0])
        out = sample_deviation(vals, dev, np.random.default_rng(0))
        assert np.allclose(out, vals + 2.0)

    def test_hard_bits_without_q(self):
        rng = np.random.default_rng(1)
        bits = np.zeros(100_000, dtype=np.int64)
        out = sample_deviation(bits, BitFlipModel(0.25, 0.0), rng)
        assert out.mean() == pytest.approx(0.25, abs=0.01)

    def test_unknown_model_rejected(self):
        with pytest.raises(TypeError):
            sample_deviation(np.zeros(3), object(), np.random.default_rng(0))


class TestAdditiveDeviation:
    def test_gaussian_moments(self):
        dev = AdditiveDeviation("gaussian", mean=0.2, var=0.01)
        rng = np.random.default_rng(2)
        draws = dev.sample(rng, 1_000_000)
        assert draws.mean() == pytest.approx(0.2, abs=3 * 0.1 / 1000)
        assert draws.var() == pytest.approx(0.01, rel=0.02)

    def test_chi_square_moments(self):
        dev = AdditiveDeviation("chi_square", dof=3, scale=0.5, shift=-1.0)
        mean, var = dev.moments()
        rng = np.random.default_rng(3)
        draws = dev.sample(rng, 1_000_000)
        assert draws.mean() == pytest.approx(mean, abs=4 * np.sqrt(var / 1e6))
        assert draws.var() == pytest.approx(var, rel=0.03)

    def test_validation(self):
        with pytest.raises(ValueError):
            AdditiveDeviation("poisson")
        with pytest.raises(ValueError):
            BitFlipModel(1.0, 0.0)
