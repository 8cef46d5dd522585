import numpy as np
import pytest
from scipy.integrate import quad
from scipy.stats import norm

from asymde.channels import (
    AsymScaling,
    Awgn,
    Bsc,
    asym_scaled_cdf,
    awgn_initial_density,
    bsc_initial_pair,
    initial_density,
    sigma2_to_snr_db,
    snr_db_to_sigma2,
    transmit,
)
from asymde.densities import MessageAlphabet


class TestSnrConversion:
    def test_zero_db_rate_half(self):
        assert snr_db_to_sigma2(0.0, 0.5) == pytest.approx(1.0, abs=1e-15)

    def test_formula_value(self):
        assert sigma2_to_snr_db(1.0, 0.25) == pytest.approx(10 * np.log10(2.0), abs=1e-12)

    def test_roundtrip(self):
        for snr in (-1.3, 0.0, 2.7, 8.9):
            back = sigma2_to_snr_db(snr_db_to_sigma2(snr, 0.4), 0.4)
            assert back == pytest.approx(snr, abs=1e-12)

    def test_rate_validation(self):
        with pytest.raises(ValueError):
            snr_db_to_sigma2(1.0, 1.0)


def cdf_quadrature_oracle(t, x, sigma2, scaling):
    """P(2 gamma(y) y / sigma2 <= t) by direct integration over y."""
    mean = 1.0 - 2.0 * x
    sd = np.sqrt(sigma2)

    def dens(y):
        return norm.pdf(y, mean, sd)

    total = 0.0
    # y < 0 branch: z = 2 gamma1 y / sigma2 (negative); z <= t there iff
    # y <= t sigma2 / (2 gamma1) when that bound is negative, else all y<0.
    b1 = t * sigma2 / (2.0 * scaling.gamma1)
    total += quad(dens, -40, min(b1, 0.0))[0]
    # y >= 0 branch
    b0 = t * sigma2 / (2.0 * scaling.gamma0)
    if b0 > 0:
        total += quad(dens, 0.0, b0)[0]
    return total


class TestAsymScaledCdf:
    def test_symmetric_reduces_to_gaussian(self):
        s = AsymScaling.symmetric(0.7)
        sigma2 = 0.8
        mu = 2 * 0.7 / sigma2
        sd = 2 * 0.7 / np.sqrt(sigma2)
        ts = np.linspace(-6, 6, 41)
        vals = asym_scaled_cdf(ts, 0, sigma2, s)
        assert np.allclose(vals, norm.cdf(ts, mu, sd), atol=1e-12)

    def test_limits(self):
        s = AsymScaling(1.0, 0.5)
        assert asym_scaled_cdf(-1e9, 0, 1.0, s) == pytest.approx(0.0, abs=1e-12)
        assert asym_scaled_cdf(1e9, 1, 1.0, s) == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("t", [-2.0, 0.0, 1.3])
    @pytest.mark.parametrize("x", [0, 1])
    def test_matches_quadrature(self, t, x):
        s = AsymScaling(1.0, 0.5)
        got = asym_scaled_cdf(t, x, 1.0, s)
        want = cdf_quadrature_oracle(t, x, 1.0, s)
        assert got == pytest.approx(want, abs=1e-9)

    def test_monotone_on_grid(self):
        rng = np.random.default_rng(0)
        for _ in range(5):
            s = AsymScaling(rng.uniform(0.1, 2.0), rng.uniform(0.1, 2.0))
            sigma2 = rng.uniform(0.2, 2.0)
            ts = np.linspace(-30, 30, 2001)
            for x in (0, 1):
                vals = asym_scaled_cdf(ts, x, sigma2, s)
                assert np.all(np.diff(vals) >= -1e-12)


class TestInitialDensity:
    def test_bsc_pair(self):
        p = bsc_initial_pair(0.1)
        assert p.p1_given0 == 0.1
        assert p.p1_given1 == 0.9
        assert initial_density(Bsc(0.1)) == p

    def test_awgn_noiseless_limit(self):
        a = MessageAlphabet(4, 1.0)
        pair = awgn_initial_density(1e-6, a, AsymScaling.symmetric(1.0))
        assert pair.given0.mass[a.pos(a.max_index)] == pytest.approx(1.0, abs=1e-9)
        assert pair.given1.mass[a.pos(-a.max_index)] == pytest.approx(1.0, abs=1e-9)

    def test_masses_match_monte_carlo(self):
        a = MessageAlphabet(4, 1.0)
        sigma2 = 1.0
        pair = awgn_initial_density(sigma2, a, AsymScaling.symmetric(1.0))
        rng = np.random.default_rng(7)
        n = 1_000_000
        y = 1.0 + np.sqrt(sigma2) * rng.standard_normal(n)
        idx = np.clip(np.floor(2 * y / sigma2 + 0.5), -7, 7).astype(int)
        emp = np.bincount(idx + 7, minlength=15) / n
        sigma = np.sqrt(np.maximum(pair.given0.mass * (1 - pair.given0.mass), 1e-12) / n)
        assert np.all(np.abs(emp - pair.given0.mass) <= 3.5 * sigma + 1e-9)

    def test_symmetric_scaling_mirror_exact(self):
        a = MessageAlphabet(5, 0.25)
        pair = awgn_initial_density(0.7, a, AsymScaling.symmetric(0.9))
        assert np.array_equal(pair.given1.mass, pair.given0.mass[::-1])

    def test_masses_sum_to_one(self):
        a = MessageAlphabet(4, 0.5)
        pair = awgn_initial_density(0.5, a, AsymScaling(1.3, 0.4))
        assert pair.given0.mass.sum() == pytest.approx(1.0, abs=1e-12)
        assert pair.given1.mass.sum() == pytest.approx(1.0, abs=1e-12)

    def test_quantizer_cell_convention(self):
        # Cell k covers [(k-1/2) step, (k+1/2) step): boundary values go up.
        from asymde.de_minsum import MinSumParams
        from asymde.sim import quantize_llrs

        params = MinSumParams(q=4, step=1.0, L=1)
        sigma2 = 2.0  # LLR = y with gamma=1: z = y
        y = np.array([1.5, 1.5 - 1e-9, -1.5, -1.5 - 1e-9, 100.0, -100.0])
        idx = quantize_llrs(y, sigma2, params)
        assert idx.tolist() == [2, 1, -1, -2, 7, -7]


class TestTransmit:
    def test_bsc_noiseless(self):
        rng = np.random.default_rng(0)
        cw = rng.integers(0, 2, 1000)
        out = transmit(Bsc(0.0), cw, rng)
        assert np.array_equal(out, cw)

    def test_bsc_flip_fraction(self):
        rng = np.random.default_rng(1)
        cw = np.zeros(1_000_000, dtype=np.int64)
        out = transmit(Bsc(0.5), cw, rng)
        frac = out.mean()
        assert abs(frac - 0.5) <= 3 * np.sqrt(0.25 / 1e6)

    def test_awgn_moments(self):
        rng = np.random.default_rng(2)
        cw = rng.integers(0, 2, 1_000_000)
        sigma2 = 0.64
        y = transmit(Awgn(sigma2), cw, rng)
        noise = y - (1.0 - 2.0 * cw)
        assert abs(noise.mean()) <= 3 * np.sqrt(sigma2 / 1e6)
        assert noise.var() == pytest.approx(sigma2, rel=0.01)

    def test_validation(self):
        with pytest.raises(ValueError):
            Bsc(0.6)
        with pytest.raises(ValueError):
            Awgn(0.0)
