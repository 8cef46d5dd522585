"""BSC and AWGN channel models.

Covers simulation sampling, SNR bookkeeping, and the conditional initial
message densities of the decoders, including the piecewise CDF of the
channel LLR under sign-dependent scaling (gamma0 for y >= 0, gamma1 for
y < 0).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import erf

from .densities import BinaryPair, ConditionalDensityPair, DiscreteDensity, MessageAlphabet


@dataclass(frozen=True)
class Bsc:
    """Binary symmetric channel with crossover probability p."""

    p: float

    def __post_init__(self):
        if not 0.0 <= self.p <= 0.5:
            raise ValueError(f"BSC parameter must lie in [0, 1/2], got {self.p}")


@dataclass(frozen=True)
class Awgn:
    """BPSK over AWGN: y = (1 - 2x) + noise, noise ~ Normal(0, sigma2)."""

    sigma2: float

    def __post_init__(self):
        if not self.sigma2 > 0:
            raise ValueError(f"noise variance must be positive, got {self.sigma2}")


@dataclass(frozen=True)
class AsymScaling:
    """Channel LLR scaling by output sign: gamma0 for y >= 0, gamma1 for y < 0."""

    gamma0: float
    gamma1: float

    def __post_init__(self):
        if not (self.gamma0 > 0 and self.gamma1 > 0):
            raise ValueError("scaling parameters must be positive")

    @classmethod
    def symmetric(cls, gamma: float) -> "AsymScaling":
        return cls(gamma, gamma)


def snr_db_to_sigma2(snr_db: float, rate: float) -> float:
    """Noise variance from normalized SNR: snr = 10 log10(1 / (2 R sigma2))."""
    if not 0.0 < rate < 1.0:
        raise ValueError(f"code rate must lie in (0, 1), got {rate}")
    return 1.0 / (2.0 * rate * 10.0 ** (snr_db / 10.0))


def sigma2_to_snr_db(sigma2: float, rate: float) -> float:
    if not 0.0 < rate < 1.0:
        raise ValueError(f"code rate must lie in (0, 1), got {rate}")
    return 10.0 * np.log10(1.0 / (2.0 * rate * sigma2))


def asym_scaled_cdf(t, x: int, sigma2: float, scaling: AsymScaling):
    """CDF of z = 2 gamma(y) y / sigma2 given codeword bit x, y BPSK+AWGN.

    gamma(y) is gamma0 for y >= 0 and gamma1 for y < 0; with equal scalings
    this reduces to the Gaussian CDF of the scaled channel LLR.
    """
    if sigma2 <= 0:
        raise ValueError("sigma2 must be positive")
    t = np.asarray(t, dtype=np.float64)
    s = 1.0 - 2.0 * x
    sigma = np.sqrt(sigma2)
    mu0 = 2.0 * scaling.gamma0 * s / sigma2
    mu1 = 2.0 * scaling.gamma1 * s / sigma2
    sd0 = 2.0 * scaling.gamma0 / sigma
    sd1 = 2.0 * scaling.gamma1 / sigma

    neg = 0.5 + 0.5 * erf((t - mu1) / (np.sqrt(2.0) * sd1))
    nonneg = (
        0.5
        + 0.5 * erf(-mu1 / (np.sqrt(2.0) * sd1))
        + 0.5 * erf(mu0 / (np.sqrt(2.0) * sd0))
        + 0.5 * erf((t - mu0) / (np.sqrt(2.0) * sd0))
    )
    out = np.where(t < 0, neg, nonneg)
    return out if out.ndim else float(out)


def bsc_initial_pair(p: float) -> BinaryPair:
    """Hard channel-output laws: P(y=1 | x=0) = p, P(y=1 | x=1) = 1 - p."""
    return BinaryPair(p, 1.0 - p)


def awgn_initial_density(
    sigma2: float, alphabet: MessageAlphabet, scaling: AsymScaling | None = None
) -> ConditionalDensityPair:
    """Quantized scaled-LLR densities given x, one mass per quantizer cell.

    Cell k covers [(k - 1/2) step, (k + 1/2) step); the extreme cells
    absorb the tails.
    """
    if scaling is None:
        scaling = AsymScaling.symmetric(1.0)
    t_max = alphabet.max_index
    edges = (np.arange(-t_max, t_max + 1) + 0.5)[:-1] * alphabet.step

    def cell_masses(x):
        cdf = asym_scaled_cdf(edges, x, sigma2, scaling)
        mass = np.empty(alphabet.size)
        mass[0] = cdf[0]
        mass[1:-1] = np.diff(cdf)
        mass[-1] = 1.0 - cdf[-1]
        return np.clip(mass, 0.0, None)

    mass0 = cell_masses(0)
    if scaling.gamma0 == scaling.gamma1:
        # The conditional laws are exact mirrors; build the x=1 masses by
        # reflection so the identity holds to the last bit.
        mass1 = mass0[::-1].copy()
    else:
        mass1 = cell_masses(1)
    return ConditionalDensityPair(
        DiscreteDensity(alphabet, mass0), DiscreteDensity(alphabet, mass1)
    )


def initial_density(channel, alphabet: MessageAlphabet | None = None,
                    scaling: AsymScaling | None = None):
    """Initial message law of a decoder fed by `channel`.

    BSC yields a BinaryPair of hard outputs; AWGN yields the quantized
    conditional pair over `alphabet`.
    """
    if isinstance(channel, Bsc):
        return bsc_initial_pair(channel.p)
    if isinstance(channel, Awgn):
        if alphabet is None:
            raise ValueError("AWGN initial density needs a message alphabet")
        return awgn_initial_density(channel.sigma2, alphabet, scaling)
    raise TypeError(f"unknown channel model {channel!r}")


def transmit(channel, codeword: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Sample the channel output for a codeword, i.i.d. per symbol."""
    codeword = np.asarray(codeword)
    if isinstance(channel, Bsc):
        flips = rng.random(codeword.shape) < channel.p
        return codeword ^ flips.astype(codeword.dtype)
    if isinstance(channel, Awgn):
        return (1.0 - 2.0 * codeword) + np.sqrt(channel.sigma2) * rng.standard_normal(
            codeword.shape
        )
    raise TypeError(f"unknown channel model {channel!r}")
