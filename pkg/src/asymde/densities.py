"""Discrete message densities conditioned on the transmitted codeword bit.

Every density-evolution engine in this package tracks a *pair* of message
densities, one for codeword bit x=0 and one for x=1, because asymmetric
deviations break the usual all-zero-codeword reduction.  Messages live on a
symmetric integer index alphabet; the quantization step only rescales
channel LLRs, so variable-node sums and check-node offsets stay exact
integer arithmetic.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

# Tolerance on total probability mass; densities are renormalized after
# every DE iteration to absorb floating-point drift.
MASS_TOL = 1e-10


@dataclass(frozen=True)
class MessageAlphabet:
    """Quantized message indices -(2^(q-1)-1) ... +(2^(q-1)-1).

    Index k represents the real message value k*step.
    """

    q: int
    step: float = 1.0

    def __post_init__(self):
        if self.q < 2:
            raise ValueError(f"bit-width q must be >= 2, got {self.q}")
        if not self.step > 0:
            raise ValueError(f"quantization step must be positive, got {self.step}")

    @property
    def max_index(self) -> int:
        return 2 ** (self.q - 1) - 1

    @property
    def size(self) -> int:
        return 2**self.q - 1

    def indices(self) -> np.ndarray:
        return np.arange(-self.max_index, self.max_index + 1)

    def reals(self) -> np.ndarray:
        return self.indices() * self.step

    def pos(self, index: int) -> int:
        """Array position of message index `index`."""
        return index + self.max_index


def _check_mass(mass: np.ndarray, tol: float = MASS_TOL) -> None:
    if np.any(mass < -tol):
        raise ValueError("density has negative mass")
    s = float(mass.sum())
    if abs(s - 1.0) > tol:
        raise ValueError(f"density mass sums to {s!r}, off tolerance {tol}")


@dataclass(frozen=True)
class DiscreteDensity:
    """Finite probability density over a message alphabet."""

    alphabet: MessageAlphabet
    mass: np.ndarray

    def __post_init__(self):
        mass = np.asarray(self.mass, dtype=np.float64)
        if mass.shape != (self.alphabet.size,):
            raise ValueError(
                f"mass has shape {mass.shape}, alphabet needs ({self.alphabet.size},)"
            )
        _check_mass(mass)
        mass = mass.copy()
        mass.flags.writeable = False
        object.__setattr__(self, "mass", mass)

    @classmethod
    def delta(cls, alphabet: MessageAlphabet, index: int) -> "DiscreteDensity":
        mass = np.zeros(alphabet.size)
        mass[alphabet.pos(index)] = 1.0
        return cls(alphabet, mass)

    @classmethod
    def uniform_on(cls, alphabet: MessageAlphabet, indices) -> "DiscreteDensity":
        mass = np.zeros(alphabet.size)
        for k in indices:
            mass[alphabet.pos(k)] = 1.0 / len(indices)
        return cls(alphabet, mass)

    def renormalized(self) -> "DiscreteDensity":
        return DiscreteDensity(self.alphabet, self.mass / self.mass.sum())

    def mirrored(self) -> "DiscreteDensity":
        """Density of -m for m ~ self."""
        return DiscreteDensity(self.alphabet, self.mass[::-1])


@dataclass(frozen=True)
class ConditionalDensityPair:
    """Message densities given codeword bit x=0 and x=1, on one alphabet."""

    given0: DiscreteDensity
    given1: DiscreteDensity

    def __post_init__(self):
        if self.given0.alphabet != self.given1.alphabet:
            raise ValueError("conditional pair components use different alphabets")

    @property
    def alphabet(self) -> MessageAlphabet:
        return self.given0.alphabet

    def to_csv(self) -> str:
        """Rows: index, real value, mass_given0, mass_given1."""
        lines = ["index,value,mass_given0,mass_given1"]
        for k, v, m0, m1 in zip(
            self.alphabet.indices(),
            self.alphabet.reals(),
            self.given0.mass,
            self.given1.mass,
        ):
            lines.append(f"{k},{float(v)!r},{float(m0)!r},{float(m1)!r}")
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        return json.dumps(
            {
                "q": self.alphabet.q,
                "step": self.alphabet.step,
                "mass_given0": self.given0.mass.tolist(),
                "mass_given1": self.given1.mass.tolist(),
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "ConditionalDensityPair":
        doc = json.loads(text)
        alphabet = MessageAlphabet(doc["q"], doc["step"])
        return cls(
            DiscreteDensity(alphabet, np.array(doc["mass_given0"])),
            DiscreteDensity(alphabet, np.array(doc["mass_given1"])),
        )


@dataclass(frozen=True)
class BinaryPair:
    """Hard-decision message laws: P(m=1 | x=0) and P(m=1 | x=1).

    Used by the Gallager B machinery, where messages live in {0, 1} and a
    density is fully described by its mass at 1.
    """

    p1_given0: float
    p1_given1: float

    def __post_init__(self):
        for p in (self.p1_given0, self.p1_given1):
            if not -MASS_TOL <= p <= 1.0 + MASS_TOL:
                raise ValueError(f"probability {p} outside [0, 1]")


def error_probability_raw(mass0: np.ndarray, mass1: np.ndarray) -> float:
    """Message error probability from raw conditional mass vectors.

    Mixes the two conditions with equal weight (equiprobable codeword
    bits): Ptilde(m) = (P0(m) + P1(-m)) / 2, then sums the negative part
    plus half the mass at zero.
    """
    mix = 0.5 * (mass0 + mass1[::-1])
    t = (len(mix) - 1) // 2
    return float(mix[:t].sum() + 0.5 * mix[t])


def error_probability(pair: ConditionalDensityPair) -> float:
    """Error probability of a sign decision on messages from `pair`."""
    return error_probability_raw(pair.given0.mass, pair.given1.mass)


def saturate_center(vec: np.ndarray, max_index: int) -> np.ndarray:
    """Fold a zero-centered mass vector into indices -max_index..max_index.

    Mass beyond the extremes is absorbed by the saturation bins; this is
    the density counterpart of clamping a message sum.
    """
    c = (len(vec) - 1) // 2
    if c < max_index:
        out = np.zeros(2 * max_index + 1)
        out[max_index - c : max_index + c + 1] = vec
        return out
    out = vec[c - max_index : c + max_index + 1].copy()
    out[0] += vec[: c - max_index].sum()
    out[-1] += vec[c + max_index + 1 :].sum()
    return out


def convolve_saturate_raw(terms, max_index: int) -> np.ndarray:
    """Density of clamp(sum of independent messages), exact.

    The full sum is convolved on an extended index range and clamped once
    at the end, matching a decoder that saturates the completed sum.
    """
    acc = terms[0]
    for t in terms[1:]:
        acc = np.convolve(acc, t)
    return saturate_center(acc, max_index)


def saturating_convolve(a: DiscreteDensity, b: DiscreteDensity) -> DiscreteDensity:
    """Density of clamp(u + v) for independent u ~ a, v ~ b."""
    if a.alphabet != b.alphabet:
        raise ValueError("saturating_convolve requires a shared alphabet")
    out = convolve_saturate_raw([a.mass, b.mass], a.alphabet.max_index)
    return DiscreteDensity(a.alphabet, out)


def mix(weighted_pairs) -> ConditionalDensityPair:
    """Convex combination of conditional pairs, componentwise.

    `weighted_pairs` is a sequence of (weight, ConditionalDensityPair);
    weights must be nonnegative and sum to 1.
    """
    weights = np.array([w for w, _ in weighted_pairs], dtype=np.float64)
    if np.any(weights < 0):
        raise ValueError("mixture weights must be nonnegative")
    if abs(weights.sum() - 1.0) > MASS_TOL:
        raise ValueError(f"mixture weights sum to {weights.sum()!r}, not 1")
    alphabet = weighted_pairs[0][1].alphabet
    m0 = np.zeros(alphabet.size)
    m1 = np.zeros(alphabet.size)
    for w, pair in weighted_pairs:
        if pair.alphabet != alphabet:
            raise ValueError("mixture components use different alphabets")
        m0 += w * pair.given0.mass
        m1 += w * pair.given1.mass
    return ConditionalDensityPair(
        DiscreteDensity(alphabet, m0), DiscreteDensity(alphabet, m1)
    )
