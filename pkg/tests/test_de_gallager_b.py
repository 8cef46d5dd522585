import itertools
import math

import numpy as np
import pytest

from asymde import analysis
from asymde.de_gallager_b import (
    GallagerBParams,
    app_error_probability,
    cn_update,
    message_error_probability,
    run,
    vn_update,
)
from asymde.densities import BinaryPair
from asymde.deviations import BitFlipModel

NOISELESS = BitFlipModel(0.0, 0.0)


def cn_oracle(pair, dc):
    """Exhaustive marginalization over sender bits and message patterns."""
    n = dc - 1
    out = {0: 0.0, 1: 0.0}
    for x in (0, 1):
        total = 0.0
        for bits in itertools.product((0, 1), repeat=n):
            if sum(bits) % 2 != x:
                continue
            weight = 0.5 ** (n - 1)
            for msgs in itertools.product((0, 1), repeat=n):
                p = weight
                for b, msg in zip(bits, msgs):
                    p1 = pair.p1_given0 if b == 0 else pair.p1_given1
                    p *= p1 if msg == 1 else 1.0 - p1
                if sum(msgs) % 2 == 1:
                    total += p
        out[x] = total
    return BinaryPair(out[0], out[1])


def gallager_a_recursion(p0, dc, L):
    """Classic scalar all-zero recursion for dv=3, b=2."""
    p = p0
    for _ in range(L - 1):
        q = 0.5 * (1.0 - (1.0 - 2.0 * p) ** (dc - 1))
        p = p0 * (1.0 - (1.0 - q) ** 2) + (1.0 - p0) * q**2
    return p


class TestCnUpdate:
    def test_perfect_messages(self):
        out = cn_update(BinaryPair(0.0, 1.0), 6)
        assert out.p1_given0 == pytest.approx(0.0, abs=1e-15)
        assert out.p1_given1 == pytest.approx(1.0, abs=1e-15)

    def test_dc2_pass_through(self):
        pair = BinaryPair(0.23, 0.71)
        out = cn_update(pair, 2)
        assert out.p1_given0 == pytest.approx(pair.p1_given0, abs=1e-15)
        assert out.p1_given1 == pytest.approx(pair.p1_given1, abs=1e-15)

    def test_matches_exhaustive_oracle(self):
        pair = BinaryPair(0.1, 0.8)
        for dc in (2, 3, 4, 5):
            got = cn_update(pair, dc)
            want = cn_oracle(pair, dc)
            assert got.p1_given0 == pytest.approx(want.p1_given0, abs=1e-12)
            assert got.p1_given1 == pytest.approx(want.p1_given1, abs=1e-12)

    def test_degree_validation(self):
        with pytest.raises(ValueError):
            cn_update(BinaryPair(0.1, 0.9), 1)


class TestVnUpdate:
    def test_perfect_cn_messages_decide_the_bit(self):
        init = BinaryPair(0.2, 0.8)
        perfect = BinaryPair(0.0, 1.0)
        out = vn_update(init, perfect, 3, 2, 2)
        assert out.p1_given0 == pytest.approx(0.0, abs=1e-15)
        assert out.p1_given1 == pytest.approx(1.0, abs=1e-15)

    def test_majority_matches_scalar_recursion_step(self):
        p0, q = 0.05, 0.12
        init = BinaryPair(p0, 1.0 - p0)
        cn = BinaryPair(q, 1.0 - q)
        out = vn_update(init, cn, 3, 2, 2)
        expected = p0 * (1.0 - (1.0 - q) ** 2) + (1.0 - p0) * q**2
        assert out.p1_given0 == pytest.approx(expected, abs=1e-14)

    def test_hand_expanded_tails(self):
        # dv=4, b0=2, b1=3, q=0.2: flip-up tail P(Bin(3,.2)>=2)=0.104,
        # flip-down tail P(#zeros>=3)=0.8^3=0.512.
        init = BinaryPair(0.07, 0.93)
        cn = BinaryPair(0.2, 0.2)
        out = vn_update(init, cn, 4, 2, 3)
        f0 = 3 * 0.04 * 0.8 + 0.008
        f1 = 0.512
        want0 = 0.93 * f0 + 0.07 * (1 - f1)
        want1 = 0.07 * f0 + 0.93 * (1 - f1)
        assert out.p1_given0 == pytest.approx(want0, abs=1e-12)
        assert out.p1_given1 == pytest.approx(want1, abs=1e-12)


class TestRun:
    def test_noiseless_perfect_channel(self):
        params = GallagerBParams(dv=3, dc=6, L=20, thresholds=(2, 2))
        res = run(0.0, params, NOISELESS)
        assert np.all(res.pe == 0.0)
        # binomial pmf evaluation leaves ~1e-47 residue at p in {0, 1}
        assert np.all(res.app_pe <= 1e-30)

    def test_matches_scalar_recursion_trace(self):
        params = GallagerBParams(dv=3, dc=6, L=30, thresholds=(2, 2))
        res = run(0.03, params, NOISELESS)
        for ell in (1, 5, 12, 30):
            assert res.pe[ell - 1] == pytest.approx(
                gallager_a_recursion(0.03, 6, ell), abs=1e-12
            )

    def test_known_threshold_against_oracle(self):
        params = GallagerBParams(dv=3, dc=6, L=200, thresholds=(2, 2))

        def runner(p):
            return run(p, params, NOISELESS).final_pe

        query = analysis.ThresholdQuery(runner=runner, lo=0.001, hi=0.2,
                                        epsilon=1e-3, resolution=1e-5,
                                        sense="increasing")
        got = analysis.threshold_search(query).value

        def oracle(p):
            return gallager_a_recursion(p, 6, 200)

        oracle_query = analysis.ThresholdQuery(runner=oracle, lo=0.001, hi=0.2,
                                               epsilon=1e-3, resolution=1e-5,
                                               sense="increasing")
        want = analysis.threshold_search(oracle_query).value
        assert got == pytest.approx(want, abs=2e-5)
        assert got == pytest.approx(0.0394, abs=5e-4)

    def test_symmetric_model_stays_mirror_symmetric(self):
        params = GallagerBParams(dv=3, dc=6, L=50, thresholds=(2, 2))
        dev = BitFlipModel(1e-3, 1e-3)
        res = run(0.02, params, dev)
        err0 = res.extras["p_0(1)"]
        err1 = res.extras["p_1(0)"]
        assert np.allclose(err0, err1, atol=1e-12)
        ref = run(0.02, params, dev, all_zero=True)
        assert np.allclose(res.pe, ref.pe, atol=1e-12)

    def test_all_zero_mode_tracks_single_chain(self):
        # Mirror forcing makes Pe equal the x=0 error component.
        params = GallagerBParams(dv=3, dc=6, L=40, thresholds=(2, 2))
        res = run(0.02, params, BitFlipModel(1e-2, 1e-4), all_zero=True)
        assert np.allclose(res.pe, res.extras["p_0(1)"], atol=1e-14)

    def test_pe_nonincreasing_below_threshold_noiseless(self):
        params = GallagerBParams(dv=3, dc=6, L=60, thresholds=(2, 2))
        res = run(0.03, params, NOISELESS)
        assert np.all(np.diff(res.pe) <= 1e-15)

    def test_schedule_recorded(self):
        params = GallagerBParams(dv=4, dc=8, L=5, thresholds=(3, 2))
        res = run(0.01, params, NOISELESS)
        assert res.schedule[0] is None
        assert res.schedule[1:] == [(3, 2)] * 4

    def test_threshold_validation(self):
        with pytest.raises(ValueError):
            GallagerBParams(dv=3, dc=6, L=5, thresholds=(1, 2))

    def test_csv_columns(self):
        params = GallagerBParams(dv=3, dc=6, L=3, thresholds=(2, 2))
        res = run(0.02, params, NOISELESS)
        header = res.to_csv().splitlines()[0].split(",")
        assert header[:2] == ["iteration", "pe"]
        assert "p_0(1)" in header and "p_1(0)" in header


class TestAppError:
    def test_perfect_cn_messages(self):
        init = BinaryPair(0.3, 0.7)
        perfect = BinaryPair(0.0, 1.0)
        assert app_error_probability(init, perfect, 3) == pytest.approx(0.0, abs=1e-14)

    def test_useless_cn_messages(self):
        init = BinaryPair(0.2, 0.8)
        coin = BinaryPair(0.5, 0.5)
        # Majority of channel + 2 coin flips, three votes, no ties:
        # error = P(init wrong) P(<2 coins overturn) + P(init ok) P(2 overturn).
        got = app_error_probability(init, coin, 2)
        assert got == pytest.approx(0.2 * 0.75 + 0.8 * 0.25, abs=1e-12)

    def test_message_error_probability(self):
        assert message_error_probability(BinaryPair(0.1, 0.8)) == pytest.approx(
            0.5 * 0.1 + 0.5 * 0.2
        )
