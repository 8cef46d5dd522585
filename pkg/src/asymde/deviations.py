"""Asymmetric hardware deviation models.

Deviations are memoryless and applied to mapping outputs: quantized
messages are hit by independent per-bit flips on their sign-magnitude
word, hard-decision CN outputs by a binary asymmetric channel, and BP
messages by an additive continuous noise term.  The bit-flip process is
summarized exactly by a row-stochastic transition matrix used in density
evolution and sampled directly in simulation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .densities import BinaryPair, DiscreteDensity, MessageAlphabet

ROW_TOL = 1e-12


@dataclass(frozen=True)
class BitFlipModel:
    """Per-bit flip probabilities: eps01 = Pr(0->1), eps10 = Pr(1->0)."""

    eps01: float
    eps10: float

    def __post_init__(self):
        for e in (self.eps01, self.eps10):
            if not 0.0 <= e < 1.0:
                raise ValueError(f"flip probability {e} outside [0, 1)")

    @property
    def is_noiseless(self) -> bool:
        return self.eps01 == 0.0 and self.eps10 == 0.0


@dataclass(frozen=True)
class AdditiveDeviation:
    """Additive message noise b for the BP decoder.

    kind "gaussian": b ~ Normal(mean, var).
    kind "chi_square": b = shift + scale * ChiSquare(dof), an asymmetric law.
    """

    kind: str
    mean: float = 0.0
    var: float = 0.0
    dof: int = 1
    scale: float = 1.0
    shift: float = 0.0

    def __post_init__(self):
        if self.kind not in ("gaussian", "chi_square"):
            raise ValueError(f"unknown additive deviation kind {self.kind!r}")
        if self.kind == "gaussian" and self.var < 0:
            raise ValueError("variance must be nonnegative")
        if self.kind == "chi_square" and self.dof < 1:
            raise ValueError("chi-square dof must be >= 1")

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        if self.kind == "gaussian":
            if self.var == 0.0:
                return np.full(size, self.mean)
            return rng.normal(self.mean, np.sqrt(self.var), size)
        return self.shift + self.scale * rng.chisquare(self.dof, size)

    def moments(self) -> tuple[float, float]:
        """(mean, variance) of the deviation law."""
        if self.kind == "gaussian":
            return self.mean, self.var
        return self.shift + self.scale * self.dof, 2.0 * self.dof * self.scale**2


def _sign_magnitude_bits(q: int) -> tuple[np.ndarray, np.ndarray]:
    """Bit table of every index in the 2^q - 1 alphabet.

    Column 0 is the sign bit (1 for negative), columns 1..q-1 the magnitude
    bits, LSB first.  Zero carries sign bit 0 here; callers that balance
    the +-0 alias average this row with its sign-flipped twin.
    """
    t = 2 ** (q - 1) - 1
    idx = np.arange(-t, t + 1)
    bits = np.empty((idx.size, q), dtype=np.uint8)
    bits[:, 0] = idx < 0
    mag = np.abs(idx)
    for j in range(q - 1):
        bits[:, 1 + j] = (mag >> j) & 1
    return idx, bits


@dataclass(frozen=True)
class TransitionMatrix:
    """Row-stochastic deviation matrix: entry [i, k] = Pr(noisy=k | clean=i)."""

    alphabet: MessageAlphabet
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.float64)
        size = self.alphabet.size
        if m.shape != (size, size):
            raise ValueError(f"transition matrix shape {m.shape}, expected {(size, size)}")
        if np.any(m < 0):
            raise ValueError("transition matrix has negative entries")
        if np.any(np.abs(m.sum(axis=1) - 1.0) > ROW_TOL):
            raise ValueError("transition matrix rows must sum to 1")
        m = m.copy()
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    @property
    def is_identity(self) -> bool:
        return bool(np.array_equal(self.matrix, np.eye(self.alphabet.size)))


def build_pi_sign_magnitude(
    q: int, model: BitFlipModel, zero_sign: str = "balanced"
) -> TransitionMatrix:
    """Exact transition matrix of independent per-bit flips on q-bit words.

    Messages use one sign bit plus q-1 magnitude bits; every bit flips
    independently (0->1 w.p. eps01, 1->0 w.p. eps10).  The noisy pattern
    "negative zero" decodes to index 0, collapsing the +-0 alias.

    zero_sign picks the stored encoding of the aliased clean zero:
    "balanced" (default) treats its sign bit as a fair coin, which keeps
    Pi[i][k] = Pi[-i][-k] exact when eps01 == eps10; "positive" stores
    sign bit 0, biasing zero toward positive corruption.
    """
    if zero_sign not in ("balanced", "positive"):
        raise ValueError(f"unknown zero_sign {zero_sign!r}")
    alphabet = MessageAlphabet(q)
    idx, clean_bits = _sign_magnitude_bits(q)
    words = np.arange(2**q, dtype=np.uint32)
    noisy_bits = ((words[:, None] >> np.arange(q)[None, :]) & 1).astype(np.uint8)
    noisy_sign = noisy_bits[:, 0]
    noisy_mag = (noisy_bits[:, 1:] << np.arange(q - 1)[None, :]).sum(axis=1)
    noisy_value = (1 - 2 * noisy_sign.astype(np.int64)) * noisy_mag

    # Pr(clean bit b -> noisy bit b~) for each of the four (b, b~) cases.
    stay0, flip0 = 1.0 - model.eps01, model.eps01
    stay1, flip1 = 1.0 - model.eps10, model.eps10
    table = np.array([[stay0, flip0], [flip1, stay1]])
    # probs[i, w] = product over bit positions of the per-bit factor
    factors = table[clean_bits[:, None, :], noisy_bits[None, :, :]]
    probs = factors.prod(axis=2)
    if zero_sign == "balanced":
        zero_row = alphabet.pos(0)
        neg_zero_bits = clean_bits[zero_row].copy()
        neg_zero_bits[0] = 1
        alt = table[neg_zero_bits[None, :], noisy_bits].prod(axis=1)
        probs[zero_row] = 0.5 * probs[zero_row] + 0.5 * alt

    size = alphabet.size
    pi = np.zeros((size, size))
    cols = noisy_value + alphabet.max_index
    np.add.at(pi.T, cols, probs.T)
    return TransitionMatrix(alphabet, pi)


def apply_pi_raw(matrix: np.ndarray, mass: np.ndarray) -> np.ndarray:
    return mass @ matrix


def apply_pi(pi: TransitionMatrix, density: DiscreteDensity) -> DiscreteDensity:
    """Noisy message density: mass vector propagated through the matrix."""
    if pi.alphabet.size != density.alphabet.size:
        raise ValueError("transition matrix and density alphabets differ")
    out = apply_pi_raw(pi.matrix, density.mass)
    return DiscreteDensity(density.alphabet, out / out.sum())


def gallager_b_noise(pair: BinaryPair, model: BitFlipModel) -> BinaryPair:
    """Noisy hard-decision CN output laws under the asymmetric flip model.

    Qtilde_x(0) = eps10 * Q_x(1) + (1 - eps01) * Q_x(0).
    """
    e01, e10 = model.eps01, model.eps10

    def noisy_p1(p1: float) -> float:
        return (1.0 - e10) * p1 + e01 * (1.0 - p1)

    return BinaryPair(noisy_p1(pair.p1_given0), noisy_p1(pair.p1_given1))


def sample_bit_flips(
    values: np.ndarray, q: int, model: BitFlipModel, rng: np.random.Generator
) -> np.ndarray:
    """One bit-flip deviation draw per message index in `values`.

    Matches the "balanced" transition matrix: the sign bit of a zero
    message is a fair coin before flipping.  Draw order is fixed (zero
    signs, sign bit, magnitude bits LSB first) for reproducibility.
    """
    if model.is_noiseless:
        return values
    t = 2 ** (q - 1) - 1
    sign = (values < 0).astype(np.int8)
    zero_coin = rng.random(values.shape) < 0.5
    sign = np.where(values == 0, zero_coin.astype(np.int8), sign)
    mag = np.abs(values).astype(np.int64)
    e01, e10 = model.eps01, model.eps10

    u = rng.random(values.shape)
    sign ^= np.where(sign == 1, u < e10, u < e01)
    for j in range(q - 1):
        bit = (mag >> j) & 1
        u = rng.random(values.shape)
        flip = np.where(bit == 1, u < e10, u < e01)
        mag ^= flip.astype(np.int64) << j
    return (1 - 2 * sign.astype(np.int64)) * mag


def sample_hard_flips(
    bits: np.ndarray, model: BitFlipModel, rng: np.random.Generator
) -> np.ndarray:
    """Flip hard-decision bits: 0->1 w.p. eps01, 1->0 w.p. eps10."""
    if model.is_noiseless:
        return bits
    u = rng.random(bits.shape)
    flip = np.where(bits == 1, u < model.eps10, u < model.eps01)
    return bits ^ flip.astype(bits.dtype)


def sample_deviation(values, model, rng: np.random.Generator, q: int | None = None):
    """One deviation draw per message, dispatched on the model kind.

    Bit-flip models act on hard bits (q None) or on q-bit sign-magnitude
    words; additive models add an independent continuous draw.
    """
    values = np.asarray(values)
    if isinstance(model, AdditiveDeviation):
        return values + model.sample(rng, values.size).reshape(values.shape)
    if isinstance(model, BitFlipModel):
        if q is None:
            return sample_hard_flips(values, model, rng)
        return sample_bit_flips(values, q, model, rng)
    raise TypeError(f"unknown deviation model {model!r}")
