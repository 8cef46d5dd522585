"""Closed-form conditional density evolution for the Gallager B decoder.

Messages are hard bits over a BSC; deviations hit the CN outputs with an
asymmetric binary flip law.  Both conditional laws (given x=0 and x=1)
are tracked, so the recursion stays valid when eps01 != eps10 breaks the
all-zero-codeword reduction.  The VN flip thresholds may differ by
channel bit value (b0 for m_init = 0, b1 for m_init = 1) and may vary per
iteration.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import binom

from .densities import BinaryPair
from .deviations import BitFlipModel, gallager_b_noise
from .results import DeRunResult


@dataclass(frozen=True)
class GallagerBParams:
    """Degrees, iteration count, and flip thresholds.

    thresholds may be a single (b0, b1) tuple applied at every iteration
    or a per-iteration list; entries must lie in {ceil(dv/2), .., dv-1}.
    None leaves selection to an online rule passed to run().
    """

    dv: int
    dc: int
    L: int
    thresholds: object = None

    def __post_init__(self):
        if self.dv < 2 or self.dc < 2:
            raise ValueError("node degrees must be >= 2")
        if self.L < 1:
            raise ValueError("iteration count must be >= 1")
        if self.thresholds is not None:
            sched = self.thresholds
            pairs = [sched] if isinstance(sched, tuple) else list(sched)
            for b0, b1 in pairs:
                for b in (b0, b1):
                    if not self.min_threshold <= b <= self.dv - 1:
                        raise ValueError(
                            f"threshold {b} outside "
                            f"{{{self.min_threshold}, .., {self.dv - 1}}}"
                        )

    @property
    def min_threshold(self) -> int:
        return -(-self.dv // 2)  # ceil(dv / 2)

    def threshold_at(self, iteration: int) -> tuple[int, int]:
        if isinstance(self.thresholds, tuple):
            return self.thresholds
        return self.thresholds[iteration - 1]


def cn_update(vn_pair: BinaryPair, dc: int) -> BinaryPair:
    """Noiseless CN output laws from the VN message laws.

    Marginalizes over the number v of bit-1 neighbours: given the
    receiving bit x, v is even (x=0) or odd (x=1) with binomial weight,
    and the XOR of the incoming messages errs with the (1-2p)-product
    parity probability.
    """
    if dc < 2:
        raise ValueError("CN degree must be >= 2")
    a = 1.0 - 2.0 * vn_pair.p1_given0
    b = 1.0 - 2.0 * vn_pair.p1_given1
    n = dc - 1
    v = np.arange(n + 1)
    weights = binom.pmf(v, n, 0.5)  # = C(n, v) (1/2)^(dc-1)
    prod = a ** (n - v) * b**v
    even = (v % 2) == 0
    q0 = float((weights[even] * (1.0 - prod[even])).sum())
    q1 = float((weights[~even] * (1.0 - prod[~even])).sum())
    return BinaryPair(q0, q1)


def _tail(n: int, p: float, b: int) -> float:
    """P(Binomial(n, p) >= b)."""
    if b <= 0:
        return 1.0
    if b > n:
        return 0.0
    return float(binom.sf(b - 1, n, p))


def vn_update(
    init_pair: BinaryPair, noisy_cn_pair: BinaryPair, dv: int, b0: int, b1: int
) -> BinaryPair:
    """Noiseless VN output laws under the two-threshold flip rule.

    A channel bit 0 flips to 1 when at least b0 incoming messages equal 1;
    a channel bit 1 flips to 0 when at least b1 incoming messages equal 0.
    """
    out = []
    for init1, q1 in (
        (init_pair.p1_given0, noisy_cn_pair.p1_given0),
        (init_pair.p1_given1, noisy_cn_pair.p1_given1),
    ):
        flip0 = _tail(dv - 1, q1, b0)  # number of 1-messages >= b0
        flip1 = _tail(dv - 1, 1.0 - q1, b1)  # number of 0-messages >= b1
        p1 = (1.0 - init1) * flip0 + init1 * (1.0 - flip1)
        out.append(p1)
    return BinaryPair(out[0], out[1])


def message_error_probability(vn_pair: BinaryPair) -> float:
    """Pe = (P_0(1) + P_1(0)) / 2 for equiprobable codeword bits."""
    return 0.5 * vn_pair.p1_given0 + 0.5 * (1.0 - vn_pair.p1_given1)


def app_error_probability(
    init_pair: BinaryPair, noisy_cn_pair: BinaryPair, dv: int
) -> float:
    """Error probability of the hard decision: majority over the channel
    bit and all dv incoming CN messages, ties resolved to the channel bit."""
    total = dv + 1
    errs = []
    for x, (init1, q1) in enumerate(
        (
            (init_pair.p1_given0, noisy_cn_pair.p1_given0),
            (init_pair.p1_given1, noisy_cn_pair.p1_given1),
        )
    ):
        n1 = np.arange(dv + 1)
        pmf = binom.pmf(n1, dv, q1)
        err = 0.0
        for init_bit, w in ((0, 1.0 - init1), (1, init1)):
            votes1 = n1 + init_bit
            dec = np.where(
                2 * votes1 > total, 1, np.where(2 * votes1 < total, 0, init_bit)
            )
            err += w * float(pmf[dec != x].sum())
        errs.append(err)
    return 0.5 * (errs[0] + errs[1])


def run(
    p0: float,
    params: GallagerBParams,
    deviation: BitFlipModel,
    all_zero: bool = False,
    threshold_rule=None,
) -> DeRunResult:
    """Density evolution over L iterations at BSC parameter p0.

    Iteration ell computes the VN laws from the previous noisy CN laws
    (the first iteration just forwards the channel), then the CN laws and
    their deviated versions.  No stopping rule is applied.  With
    all_zero=True the x=1 law is forced to the mirror of the x=0 law
    after every update, reproducing the all-zero-codeword reference DE.

    threshold_rule, if given, is called as rule(init_pair, noisy_cn_pair)
    and must return the (b0, b1) pair for the coming VN update.
    """
    if not 0.0 <= p0 <= 0.5:
        raise ValueError(f"BSC parameter must lie in [0, 1/2], got {p0}")
    if params.thresholds is None and threshold_rule is None:
        raise ValueError("need fixed thresholds or an online rule")

    init = BinaryPair(p0, 1.0 - p0)
    pe = np.empty(params.L)
    app = np.empty(params.L)
    err0 = np.empty(params.L)
    err1 = np.empty(params.L)
    schedule: list = []

    vn = init
    noisy_cn = None
    for ell in range(1, params.L + 1):
        if ell == 1:
            vn = init
            schedule.append(None)
        else:
            if threshold_rule is not None:
                b0, b1 = threshold_rule(init, noisy_cn)
            else:
                b0, b1 = params.threshold_at(ell)
            schedule.append((b0, b1))
            vn = vn_update(init, noisy_cn, params.dv, b0, b1)
        if all_zero:
            vn = BinaryPair(vn.p1_given0, 1.0 - vn.p1_given0)
        pe[ell - 1] = message_error_probability(vn)
        err0[ell - 1] = vn.p1_given0
        err1[ell - 1] = 1.0 - vn.p1_given1

        cn = cn_update(vn, params.dc)
        noisy_cn = gallager_b_noise(cn, deviation)
        if all_zero:
            noisy_cn = BinaryPair(noisy_cn.p1_given0, 1.0 - noisy_cn.p1_given0)
        app[ell - 1] = app_error_probability(init, noisy_cn, params.dv)

    return DeRunResult(
        pe=pe,
        app_pe=app,
        schedule=schedule,
        extras={"p_0(1)": err0, "p_1(0)": err1},
        final_pair=vn,
        meta={
            "decoder": "gallager_b",
            "p0": p0,
            "dv": params.dv,
            "dc": params.dc,
            "L": params.L,
            "eps01": deviation.eps01,
            "eps10": deviation.eps10,
            "all_zero": all_zero,
        },
    )
