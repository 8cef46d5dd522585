import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from asymde.densities import (
    BinaryPair,
    ConditionalDensityPair,
    DiscreteDensity,
    MessageAlphabet,
    error_probability,
    error_probability_raw,
    mix,
    saturating_convolve,
)

A3 = MessageAlphabet(3, 1.0)


def pair(alphabet, m0, m1):
    return ConditionalDensityPair(
        DiscreteDensity(alphabet, np.asarray(m0, dtype=float)),
        DiscreteDensity(alphabet, np.asarray(m1, dtype=float)),
    )


def random_density(rng, size):
    v = rng.random(size)
    return v / v.sum()


class TestAlphabet:
    def test_shape(self):
        a = MessageAlphabet(4, 0.5)
        assert a.size == 15
        assert a.max_index == 7
        assert a.indices()[0] == -7 and a.indices()[-1] == 7
        assert np.allclose(a.reals(), a.indices() * 0.5)

    def test_validation(self):
        with pytest.raises(ValueError):
            MessageAlphabet(1)
        with pytest.raises(ValueError):
            MessageAlphabet(3, 0.0)


class TestDensityValidation:
    def test_mass_must_sum_to_one(self):
        bad = np.zeros(A3.size)
        bad[0] = 0.5
        with pytest.raises(ValueError):
            DiscreteDensity(A3, bad)

    def test_negative_mass_rejected(self):
        bad = np.zeros(A3.size)
        bad[0] = 1.5
        bad[1] = -0.5
        with pytest.raises(ValueError):
            DiscreteDensity(A3, bad)

    def test_alphabet_mismatch_in_pair(self):
        with pytest.raises(ValueError):
            ConditionalDensityPair(
                DiscreteDensity.delta(A3, 0),
                DiscreteDensity.delta(MessageAlphabet(4), 0),
            )


class TestErrorProbability:
    def test_perfectly_separated(self):
        p = pair(A3, DiscreteDensity.delta(A3, 3).mass, DiscreteDensity.delta(A3, -3).mass)
        assert error_probability(p) == 0.0

    def test_all_mass_at_zero(self):
        p = pair(A3, DiscreteDensity.delta(A3, 0).mass, DiscreteDensity.delta(A3, 0).mass)
        assert error_probability(p) == 0.5

    def test_uniform_against_delta(self):
        given0 = DiscreteDensity.uniform_on(A3, [-1, 0, 1])
        given1 = DiscreteDensity.delta(A3, 1)
        p = ConditionalDensityPair(given0, given1)
        assert error_probability(p) == pytest.approx(0.75, abs=1e-15)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_in_unit_interval(self, seed):
        rng = np.random.default_rng(seed)
        m0 = random_density(rng, A3.size)
        m1 = random_density(rng, A3.size)
        pe = error_probability_raw(m0, m1)
        assert 0.0 <= pe <= 1.0

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_mirror_pair_reduces_to_single_density(self, seed):
        rng = np.random.default_rng(seed)
        m0 = random_density(rng, A3.size)
        pe = error_probability_raw(m0, m0[::-1])
        t = A3.max_index
        assert pe == pytest.approx(m0[:t].sum() + 0.5 * m0[t], abs=1e-14)


class TestSaturatingConvolve:
    def test_saturation(self):
        out = saturating_convolve(DiscreteDensity.delta(A3, 2), DiscreteDensity.delta(A3, 3))
        assert np.array_equal(out.mass, DiscreteDensity.delta(A3, 3).mass)

    def test_identity_element(self):
        rng = np.random.default_rng(0)
        d = DiscreteDensity(A3, random_density(rng, A3.size))
        out = saturating_convolve(DiscreteDensity.delta(A3, 0), d)
        assert np.allclose(out.mass, d.mass, atol=1e-15)

    def test_two_coin_sum(self):
        u = DiscreteDensity.uniform_on(A3, [-1, 1])
        out = saturating_convolve(u, u)
        expected = np.zeros(A3.size)
        expected[A3.pos(-2)] = 0.25
        expected[A3.pos(0)] = 0.5
        expected[A3.pos(2)] = 0.25
        assert np.allclose(out.mass, expected, atol=1e-15)

    def test_alphabet_mismatch(self):
        with pytest.raises(ValueError):
            saturating_convolve(
                DiscreteDensity.delta(A3, 0), DiscreteDensity.delta(MessageAlphabet(4), 0)
            )

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_commutative(self, seed):
        rng = np.random.default_rng(seed)
        a = DiscreteDensity(A3, random_density(rng, A3.size))
        b = DiscreteDensity(A3, random_density(rng, A3.size))
        assert np.allclose(
            saturating_convolve(a, b).mass, saturating_convolve(b, a).mass, atol=1e-15
        )

    def test_associative_without_saturation(self):
        big = MessageAlphabet(5)
        rng = np.random.default_rng(3)
        # Mass confined to small indices never reaches the extremes.
        def small_density():
            m = np.zeros(big.size)
            m[big.pos(-2) : big.pos(3)] = random_density(rng, 5)
            return DiscreteDensity(big, m)

        a, b, c = small_density(), small_density(), small_density()
        left = saturating_convolve(saturating_convolve(a, b), c)
        right = saturating_convolve(a, saturating_convolve(b, c))
        assert np.allclose(left.mass, right.mass, atol=1e-14)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_matches_enumeration(self, seed):
        rng = np.random.default_rng(seed)
        a = random_density(rng, A3.size)
        b = random_density(rng, A3.size)
        t = A3.max_index
        expected = np.zeros(A3.size)
        for i, pa in zip(A3.indices(), a):
            for j, pb in zip(A3.indices(), b):
                s = max(-t, min(t, i + j))
                expected[A3.pos(s)] += pa * pb
        out = saturating_convolve(DiscreteDensity(A3, a), DiscreteDensity(A3, b))
        assert np.allclose(out.mass, expected, atol=1e-14)


class TestMix:
    def test_single_weight_identity(self):
        rng = np.random.default_rng(1)
        p = pair(A3, random_density(rng, A3.size), random_density(rng, A3.size))
        out = mix([(1.0, p)])
        assert np.allclose(out.given0.mass, p.given0.mass, atol=1e-15)
        assert np.allclose(out.given1.mass, p.given1.mass, atol=1e-15)

    def test_two_delta_blend(self):
        p1 = pair(A3, DiscreteDensity.delta(A3, 1).mass, DiscreteDensity.delta(A3, 1).mass)
        p2 = pair(A3, DiscreteDensity.delta(A3, -1).mass, DiscreteDensity.delta(A3, -1).mass)
        out = mix([(0.5, p1), (0.5, p2)])
        expected = DiscreteDensity.uniform_on(A3, [-1, 1]).mass
        assert np.allclose(out.given0.mass, expected, atol=1e-15)
        assert np.allclose(out.given1.mass, expected, atol=1e-15)

    def test_degree_profile_blend_matches_hand_mix(self):
        # Edge fractions of the rate-1/2 two-degree profile.
        w3, w9 = 0.7857, 0.2143
        rng = np.random.default_rng(2)
        pa = pair(A3, random_density(rng, A3.size), random_density(rng, A3.size))
        pb = pair(A3, random_density(rng, A3.size), random_density(rng, A3.size))
        out = mix([(w3, pa), (w9, pb)])
        assert np.allclose(
            out.given0.mass, w3 * pa.given0.mass + w9 * pb.given0.mass, atol=1e-14
        )
        assert np.allclose(
            out.given1.mass, w3 * pa.given1.mass + w9 * pb.given1.mass, atol=1e-14
        )
        assert out.given0.mass.sum() == pytest.approx(1.0, abs=1e-12)

    def test_weight_sum_violation(self):
        p = pair(A3, DiscreteDensity.delta(A3, 0).mass, DiscreteDensity.delta(A3, 0).mass)
        with pytest.raises(ValueError):
            mix([(0.7, p), (0.2, p)])


class TestSerialization:
    def test_csv_layout(self):
        p = pair(A3, DiscreteDensity.delta(A3, 1).mass, DiscreteDensity.delta(A3, -1).mass)
        text = p.to_csv()
        lines = text.strip().split("\n")
        assert lines[0] == "index,value,mass_given0,mass_given1"
        assert len(lines) == 1 + A3.size
        first = lines[1].split(",")
        assert first[0] == "-3" and float(first[1]) == -3.0

    def test_json_roundtrip(self):
        rng = np.random.default_rng(4)
        p = pair(A3, random_density(rng, A3.size), random_density(rng, A3.size))
        q = ConditionalDensityPair.from_json(p.to_json())
        assert np.array_equal(q.given0.mass, p.given0.mass)
        assert np.array_equal(q.given1.mass, p.given1.mass)
        assert q.alphabet == p.alphabet


class TestBinaryPair:
    def test_validation(self):
        with pytest.raises(ValueError):
            BinaryPair(1.2, 0.0)
        BinaryPair(0.0, 1.0)
