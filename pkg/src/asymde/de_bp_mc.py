"""Population (Monte-Carlo) density evolution for the BP decoder.

The check-node density transform of belief propagation has no closed
form, so the conditional message densities are represented by sample
populations, one per codeword bit value.  Additive deviations, possibly
asymmetric (e.g. a shifted chi-square law), are drawn fresh for every VN
output sample, matching the memoryless deviation model.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .deviations import AdditiveDeviation
from .results import DeRunResult

MAG_FLOOR = 1e-15
MAG_CEIL = 50.0


@dataclass
class Population:
    """Sampled conditional message densities, one array per bit value."""

    samples0: np.ndarray
    samples1: np.ndarray

    def __post_init__(self):
        if self.samples0.shape != self.samples1.shape:
            raise ValueError("conditional populations must have equal size")
        if not (np.isfinite(self.samples0).all() and np.isfinite(self.samples1).all()):
            raise ValueError("populations must hold finite values")

    @property
    def size(self) -> int:
        return self.samples0.size

    def error_probability(self) -> float:
        e0 = (self.samples0 < 0).mean() + 0.5 * (self.samples0 == 0).mean()
        e1 = (self.samples1 > 0).mean() + 0.5 * (self.samples1 == 0).mean()
        return float(0.5 * e0 + 0.5 * e1)


def cn_kernel(msgs: np.ndarray, clamp_counter=None) -> np.ndarray:
    """BP check-node combine: sign product and -log tanh magnitude sum.

    msgs has shape (N, dc-1).  Magnitudes are clamped to
    [MAG_FLOOR, MAG_CEIL] before the transform to keep logs finite;
    clamping events are counted when a counter list is supplied.
    """
    signs = np.sign(msgs)
    sign_out = signs.prod(axis=1)
    mags = np.abs(msgs)
    clipped = np.clip(mags, MAG_FLOOR, MAG_CEIL)
    if clamp_counter is not None:
        clamp_counter.append(int(np.count_nonzero(mags != clipped)))
    t = -np.log(np.tanh(0.5 * clipped))
    total = t.sum(axis=1)
    inner = np.exp(-total)
    inner = np.minimum(inner, 1.0 - 1e-16)
    return sign_out * 2.0 * np.arctanh(inner)


def population_de_run(
    sigma2: float,
    dv: int,
    dc: int,
    L: int,
    deviation: AdditiveDeviation,
    n_pop: int = 100_000,
    seed: int = 0,
) -> DeRunResult:
    """Monte-Carlo DE of the BP decoder with additive VN-output deviations.

    Per iteration, each VN sample is a fresh channel LLR draw plus dv-1
    check messages resampled with replacement plus one deviation draw;
    each check sample combines dc-1 variable messages whose bit labels
    are uniform conditioned on even/odd parity matching the receiving
    bit.  The trace reports the message error probability of the noisy
    VN populations with its binomial standard error.
    """
    if n_pop < 10_000:
        raise ValueError("population size must be at least 10^4")
    if sigma2 <= 0:
        raise ValueError("sigma2 must be positive")
    rng = np.random.default_rng(seed)
    mean = 2.0 / sigma2
    sd = 2.0 / np.sqrt(sigma2)

    def channel(x: int, size: int) -> np.ndarray:
        return rng.normal(mean * (1.0 - 2.0 * x), sd, size)

    clamp_events: list = []
    pe = np.empty(L)
    se = np.empty(L)
    v0 = v1 = None
    q0 = q1 = None
    for ell in range(1, L + 1):
        b0 = deviation.sample(rng, n_pop)
        b1 = deviation.sample(rng, n_pop)
        if ell == 1:
            v0 = channel(0, n_pop) + b0
            v1 = channel(1, n_pop) + b1
        else:
            acc0 = channel(0, n_pop) + b0
            acc1 = channel(1, n_pop) + b1
            for _ in range(dv - 1):
                acc0 = acc0 + q0[rng.integers(0, n_pop, n_pop)]
                acc1 = acc1 + q1[rng.integers(0, n_pop, n_pop)]
            v0, v1 = acc0, acc1
        pop = Population(v0, v1)
        p = pop.error_probability()
        pe[ell - 1] = p
        se[ell - 1] = np.sqrt(max(p * (1.0 - p), 1.0 / n_pop) / n_pop)

        q0 = _cn_population(v0, v1, dc, 0, rng, clamp_events)
        q1 = _cn_population(v0, v1, dc, 1, rng, clamp_events)

    degenerate = bool(
        np.all(np.abs(q0) >= MAG_CEIL) or np.all(np.abs(q1) >= MAG_CEIL)
    )
    return DeRunResult(
        pe=pe,
        extras={"pe_se": se},
        final_pair=Population(v0, v1),
        meta={
            "decoder": "bp_population",
            "sigma2": sigma2,
            "dv": dv,
            "dc": dc,
            "L": L,
            "n_pop": n_pop,
            "deviation": deviation.kind,
            "clamp_events": int(sum(clamp_events)),
            "degenerate": degenerate,
        },
    )


def _cn_population(
    v0: np.ndarray, v1: np.ndarray, dc: int, x: int,
    rng: np.random.Generator, clamp_counter,
) -> np.ndarray:
    """CN output samples for receiving bit x, parity-consistent labels.

    dc-2 sender labels are uniform and the last is set so the XOR equals
    x; this realizes the even/odd binomial label mixture exactly.
    """
    n_pop = v0.size
    msgs = np.empty((n_pop, dc - 1))
    if dc == 2:
        labels_last = np.full(n_pop, x)
        pick = rng.integers(0, n_pop, n_pop)
        msgs[:, 0] = np.where(labels_last == 0, v0[pick], v1[pick])
    else:
        labels = rng.integers(0, 2, (n_pop, dc - 2))
        parity = labels.sum(axis=1) % 2
        last = (parity + x) % 2
        for d in range(dc - 2):
            pick = rng.integers(0, n_pop, n_pop)
            msgs[:, d] = np.where(labels[:, d] == 0, v0[pick], v1[pick])
        pick = rng.integers(0, n_pop, n_pop)
        msgs[:, dc - 2] = np.where(last == 0, v0[pick], v1[pick])
    return cn_kernel(msgs, clamp_counter)
