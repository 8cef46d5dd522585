"""Exact conditional density evolution for the quantized offset Min-Sum decoder.

Messages are integer quantizer indices.  The VN update is a saturating
sum (full convolution, clamped once), the CN update is the sign-product /
minimum-magnitude kernel with sign-dependent offsets, and bit-level
deviations enter as a transition matrix applied to the VN output
densities.  Both conditional densities are tracked, so the recursion
remains exact for asymmetric deviations and asymmetric decoder
parameters (gamma0, gamma1, lambda_plus, lambda_minus).

The CN update folds inputs pairwise while tracking the parity of the
senders' codeword bits: each input contributes (P~_0 / 2, P~_1 / 2) to the
(even, odd) components, and after dc-1 inputs the conditional CN outputs
are twice the matching parity component.  This reproduces the binomial
even/odd mixture at cost O(dc * |alphabet|) per magnitude level instead
of enumerating message tuples.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channels import AsymScaling, awgn_initial_density
from .densities import (
    ConditionalDensityPair,
    DiscreteDensity,
    MessageAlphabet,
    convolve_saturate_raw,
    error_probability_raw,
)
from .deviations import BitFlipModel, build_pi_sign_magnitude
from .results import DeRunResult


@dataclass(frozen=True)
class MinSumParams:
    """Quantization, channel scalings, CN offsets, and iteration count.

    Offsets are integers in index units; lambda_plus applies when the CN
    sign product is positive, lambda_minus when it is negative.  The
    symmetric decoder is gamma0 == gamma1, lambda_plus == lambda_minus.
    """

    q: int
    step: float
    gamma0: float = 1.0
    gamma1: float = 1.0
    lambda_plus: int = 0
    lambda_minus: int = 0
    L: int = 10

    def __post_init__(self):
        max_index = 2 ** (self.q - 1) - 1
        for lam in (self.lambda_plus, self.lambda_minus):
            if not 0 <= lam < max_index:
                raise ValueError(f"offset {lam} outside [0, {max_index})")
        if self.L < 1:
            raise ValueError("iteration count must be >= 1")
        if not (self.gamma0 > 0 and self.gamma1 > 0):
            raise ValueError("scaling parameters must be positive")

    @property
    def alphabet(self) -> MessageAlphabet:
        return MessageAlphabet(self.q, self.step)

    @property
    def scaling(self) -> AsymScaling:
        return AsymScaling(self.gamma0, self.gamma1)

    @property
    def is_symmetric(self) -> bool:
        return self.gamma0 == self.gamma1 and self.lambda_plus == self.lambda_minus


def _min_sign_combine(a: np.ndarray, b: np.ndarray, t: int) -> np.ndarray:
    """Pushforward of c = sgn(u) sgn(v) min(|u|, |v|) for mass stacks.

    a, b have shape (..., 2t+1) and need not be normalized.  Any zero
    input forces output zero (sgn(0) = 0 annihilates the product).
    """
    a0 = a[..., t]
    b0 = b[..., t]
    ap = a[..., t + 1 :]
    bp = b[..., t + 1 :]
    am = a[..., t - 1 :: -1]
    bm = b[..., t - 1 :: -1]

    # Inclusive magnitude tails S[., m] = sum_{|u| >= m}; strict = S - own.
    def tail(x):
        return np.flip(np.cumsum(np.flip(x, -1), -1), -1)

    sap, sam = tail(ap), tail(am)
    sbp, sbm = tail(bp), tail(bm)
    cp = ap * sbp + (sap - ap) * bp + am * sbm + (sam - am) * bm
    cm = ap * sbm + (sap - ap) * bm + am * sbp + (sam - am) * bp
    ta = a.sum(axis=-1)
    tb = b.sum(axis=-1)
    c0 = a0 * tb + ta * b0 - a0 * b0

    out = np.empty_like(a)
    out[..., t] = c0
    out[..., t + 1 :] = cp
    out[..., t - 1 :: -1] = cm
    return out


def _apply_offset(vec: np.ndarray, lam_plus: int, lam_minus: int, t: int) -> np.ndarray:
    """Map magnitude m to max(m - lambda_sign, 0), keeping the sign; 0 stays."""
    out = np.zeros_like(vec)
    out[t] = vec[t]
    if lam_plus == 0:
        out[t + 1 :] += vec[t + 1 :]
    else:
        out[t] += vec[t + 1 : t + 1 + lam_plus].sum()
        out[t + 1 : 2 * t + 1 - lam_plus] += vec[t + 1 + lam_plus :]
    if lam_minus == 0:
        out[:t] += vec[:t]
    else:
        out[t] += vec[t - lam_minus : t].sum()
        out[lam_minus:t] += vec[: t - lam_minus]
    return out


def _cn_raw(
    p0: np.ndarray, p1: np.ndarray, dc: int, lam_plus: int, lam_minus: int, t: int
) -> tuple[np.ndarray, np.ndarray]:
    if dc < 2:
        raise ValueError("CN degree must be >= 2")
    e = 0.5 * p0
    o = 0.5 * p1
    even, odd = e, o
    for _ in range(dc - 2):
        stack_a = np.stack([even, odd, even, odd])
        stack_b = np.stack([e, e, o, o])
        c = _min_sign_combine(stack_a, stack_b, t)
        even = c[0] + c[3]
        odd = c[1] + c[2]
    q0 = 2.0 * _apply_offset(even, lam_plus, lam_minus, t)
    q1 = 2.0 * _apply_offset(odd, lam_plus, lam_minus, t)
    return q0, q1


def _vn_raw(init: np.ndarray, cn: np.ndarray, dv: int, t: int) -> np.ndarray:
    return convolve_saturate_raw([init] + [cn] * (dv - 1), t)


def vn_density(
    init_pair: ConditionalDensityPair, cn_pair: ConditionalDensityPair, dv: int
) -> ConditionalDensityPair:
    """Noiseless VN output densities: saturated sum of the channel message
    and dv-1 independent CN messages, per condition."""
    if init_pair.alphabet != cn_pair.alphabet:
        raise ValueError("initial and CN densities use different alphabets")
    t = init_pair.alphabet.max_index
    out0 = _vn_raw(init_pair.given0.mass, cn_pair.given0.mass, dv, t)
    out1 = _vn_raw(init_pair.given1.mass, cn_pair.given1.mass, dv, t)
    alphabet = init_pair.alphabet
    return ConditionalDensityPair(
        DiscreteDensity(alphabet, out0), DiscreteDensity(alphabet, out1)
    )


def cn_density(
    noisy_vn_pair: ConditionalDensityPair,
    dc: int,
    lambda_plus: int = 0,
    lambda_minus: int = 0,
) -> ConditionalDensityPair:
    """Conditional CN output densities under sign-dependent offsets."""
    alphabet = noisy_vn_pair.alphabet
    q0, q1 = _cn_raw(
        noisy_vn_pair.given0.mass,
        noisy_vn_pair.given1.mass,
        dc,
        lambda_plus,
        lambda_minus,
        alphabet.max_index,
    )
    return ConditionalDensityPair(
        DiscreteDensity(alphabet, q0), DiscreteDensity(alphabet, q1)
    )


def _app_error(init0, init1, q0, q1, dv: int) -> float:
    """Error probability of the sign decision on channel + all dv CN inputs.

    Saturation cannot change the sign of the sum, so the decision law is
    computed on the unclamped convolution; ties fall to a fair coin.
    """
    acc0, acc1 = init0, init1
    for _ in range(dv):
        acc0 = np.convolve(acc0, q0)
        acc1 = np.convolve(acc1, q1)
    c = (len(acc0) - 1) // 2
    e0 = acc0[:c].sum() + 0.5 * acc0[c]
    e1 = acc1[c + 1 :].sum() + 0.5 * acc1[c]
    return float(0.5 * e0 + 0.5 * e1)


def run(
    sigma2: float,
    dv: int,
    dc: int,
    params: MinSumParams,
    deviation: BitFlipModel,
    all_zero: bool = False,
    init_pair: ConditionalDensityPair | None = None,
    keep_history: bool = False,
) -> DeRunResult:
    """Density evolution over L iterations at AWGN variance sigma2.

    Each iteration: VN densities from the previous CN densities (the
    first iteration forwards the channel), deviation matrix on the VN
    outputs, then CN densities.  pe tracks the noiseless VN messages,
    pe_noisy the deviated ones, app_pe the hard APP decision.  With
    all_zero=True the x=1 chain is forced to the mirror of x=0 after
    every stage, reproducing the all-zero-codeword reference DE.
    """
    if sigma2 <= 0:
        raise ValueError("sigma2 must be positive")
    alphabet = params.alphabet
    t = alphabet.max_index
    if init_pair is None:
        init_pair = awgn_initial_density(sigma2, alphabet, params.scaling)
    init0 = init_pair.given0.mass.copy()
    init1 = init_pair.given1.mass.copy()
    if all_zero:
        init1 = init0[::-1].copy()
    pi = build_pi_sign_magnitude(params.q, deviation).matrix

    pe = np.empty(params.L)
    pe_noisy = np.empty(params.L)
    app = np.empty(params.L)
    history = []
    drift = 0.0
    q0 = q1 = None
    for ell in range(1, params.L + 1):
        if ell == 1:
            v0, v1 = init0, init1
        else:
            v0 = _vn_raw(init0, q0, dv, t)
            v1 = _vn_raw(init1, q1, dv, t)
        drift = max(drift, abs(v0.sum() - 1.0), abs(v1.sum() - 1.0))
        v0 = v0 / v0.sum()
        v1 = v1 / v1.sum()
        if all_zero:
            v1 = v0[::-1]
        pe[ell - 1] = error_probability_raw(v0, v1)

        n0 = v0 @ pi
        n1 = v1 @ pi
        drift = max(drift, abs(n0.sum() - 1.0), abs(n1.sum() - 1.0))
        n0 = n0 / n0.sum()
        n1 = n1 / n1.sum()
        if all_zero:
            n1 = n0[::-1]
        pe_noisy[ell - 1] = error_probability_raw(n0, n1)

        q0, q1 = _cn_raw(n0, n1, dc, params.lambda_plus, params.lambda_minus, t)
        drift = max(drift, abs(q0.sum() - 1.0), abs(q1.sum() - 1.0))
        q0 = q0 / q0.sum()
        q1 = q1 / q1.sum()
        if all_zero:
            q1 = q0[::-1]
        app[ell - 1] = _app_error(init0, init1, q0, q1, dv)
        if keep_history:
            history.append({"vn": (v0, v1), "vn_noisy": (n0, n1), "cn": (q0, q1)})

    final = ConditionalDensityPair(
        DiscreteDensity(alphabet, n0 / n0.sum()), DiscreteDensity(alphabet, n1 / n1.sum())
    )
    return DeRunResult(
        pe=pe,
        pe_noisy=pe_noisy,
        app_pe=app,
        final_pair=final,
        extras={"history": history} if keep_history else {},
        meta={
            "decoder": "minsum",
            "sigma2": sigma2,
            "dv": dv,
            "dc": dc,
            "q": params.q,
            "step": params.step,
            "gamma0": params.gamma0,
            "gamma1": params.gamma1,
            "lambda_plus": params.lambda_plus,
            "lambda_minus": params.lambda_minus,
            "L": params.L,
            "eps01": deviation.eps01,
            "eps10": deviation.eps10,
            "all_zero": all_zero,
            "max_mass_drift": drift,
        },
    )
