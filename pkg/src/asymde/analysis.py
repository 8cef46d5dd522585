"""Threshold search, finite-length BER prediction, and irregular ensembles.

The threshold of an ensemble/decoder/deviation triple is the worst
channel parameter keeping the final message error probability below a
target epsilon: the largest crossover p for a BSC, the smallest SNR for
AWGN.  Finite-length error rates are predicted by integrating the
asymptotic error-probability curve against the Gaussian law of the
empirically observed channel parameter.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import simpson
from scipy.interpolate import PchipInterpolator
from scipy.special import erf, erfinv
from scipy.stats import norm

from . import de_minsum
from .densities import error_probability_raw
from .deviations import BitFlipModel, build_pi_sign_magnitude
from .results import DeRunResult

DEFAULT_EPSILON = 1e-3
DEFAULT_BSC_RESOLUTION = 1e-4
DEFAULT_SNR_RESOLUTION_DB = 0.01


@dataclass
class ThresholdQuery:
    """Bisection task: runner maps a channel parameter to a final Pe.

    sense "increasing" means Pe grows with the parameter (BSC crossover:
    threshold is the largest passing value); "decreasing" means Pe shrinks
    with the parameter (SNR in dB: threshold is the smallest passing value).
    """

    runner: object
    lo: float
    hi: float
    epsilon: float = DEFAULT_EPSILON
    resolution: float = DEFAULT_BSC_RESOLUTION
    sense: str = "increasing"

    def __post_init__(self):
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError("epsilon must lie in (0, 1)")
        if not self.lo < self.hi:
            raise ValueError("search interval must be ordered")
        if self.resolution <= 0:
            raise ValueError("resolution must be positive")
        if self.sense not in ("increasing", "decreasing"):
            raise ValueError(f"unknown sense {self.sense!r}")


@dataclass
class ThresholdResult:
    value: float | None
    bracket: tuple | None
    crossed: bool
    evals: int
    flags: list = field(default_factory=list)


def threshold_search(query: ThresholdQuery) -> ThresholdResult:
    """Bisect for the worst channel parameter with Pe < epsilon.

    Requires Pe to cross epsilon inside [lo, hi]; when it does not, the
    result reports crossed=False and no value is fabricated.
    """
    evals = []

    def pe(x: float) -> float:
        v = float(query.runner(x))
        evals.append((x, v))
        return v

    eps = query.epsilon
    lo, hi = query.lo, query.hi
    pe_lo, pe_hi = pe(lo), pe(hi)
    good_low = pe_lo < eps  # Pe passes on the low end
    good_high = pe_hi < eps
    if query.sense == "increasing":
        ok = good_low and not good_high
    else:
        ok = good_high and not good_low
    if not ok:
        return ThresholdResult(None, None, False, len(evals), ["no crossing in interval"])

    while hi - lo > query.resolution:
        mid = 0.5 * (lo + hi)
        passes = pe(mid) < eps
        if query.sense == "increasing":
            if passes:
                lo = mid
            else:
                hi = mid
        else:
            if passes:
                hi = mid
            else:
                lo = mid

    flags = []
    xs = np.array([x for x, _ in evals])
    vs = np.array([v for _, v in evals])
    order = np.argsort(xs)
    diffs = np.diff(vs[order])
    if query.sense == "increasing" and np.any(diffs < -1e-12):
        flags.append("non-monotone Pe; crossing may not be unique")
    if query.sense == "decreasing" and np.any(diffs > 1e-12):
        flags.append("non-monotone Pe; crossing may not be unique")

    value = lo if query.sense == "increasing" else hi
    return ThresholdResult(value, (lo, hi), True, len(evals), flags)


@dataclass
class PeCurve:
    """Asymptotic Pe over a grid of channel parameters, with interpolation.

    Interpolation is monotone piecewise-cubic on log(Pe) when the curve is
    strictly positive, with a linear fallback when zeros are present.
    Queries outside the grid clamp to the end values (flagged).
    """

    z: np.ndarray
    pe: np.ndarray

    def __post_init__(self):
        self.z = np.asarray(self.z, dtype=np.float64)
        self.pe = np.asarray(self.pe, dtype=np.float64)
        if self.z.ndim != 1 or self.z.shape != self.pe.shape:
            raise ValueError("z and pe must be 1-D arrays of equal length")
        if np.any(np.diff(self.z) <= 0):
            raise ValueError("curve grid must be strictly increasing")
        if np.any((self.pe < 0) | (self.pe > 1)):
            raise ValueError("Pe values must lie in [0, 1]")
        self.clamped_queries = 0
        if np.all(self.pe > 0):
            self._interp = PchipInterpolator(self.z, np.log(self.pe))
            self._log = True
        else:
            self._interp = None
            self._log = False

    def interpolate(self, zq) -> np.ndarray:
        zq = np.asarray(zq, dtype=np.float64)
        out_of_range = (zq < self.z[0]) | (zq > self.z[-1])
        self.clamped_queries += int(out_of_range.sum())
        zc = np.clip(zq, self.z[0], self.z[-1])
        if self._log:
            return np.exp(self._interp(zc))
        return np.interp(zc, self.z, self.pe)

    def to_json_dict(self) -> dict:
        return {"z": self.z.tolist(), "pe": self.pe.tolist()}

    @classmethod
    def from_json_dict(cls, doc: dict) -> "PeCurve":
        return cls(np.array(doc["z"]), np.array(doc["pe"]))


def finite_length_pe(curve: PeCurve, n: int, p0: float, points: int = 513) -> float:
    """Finite-length error probability at blocklength n and parameter p0.

    Integrates Pe(z) * Normal(z; p0, p0(1-p0)/n) over z in [0, 1/2] by
    composite Simpson on at least `points` nodes across p0 +- 8 standard
    deviations (intersected with [0, 1/2]).
    """
    if n < 1:
        raise ValueError("blocklength must be >= 1")
    if not 0.0 <= p0 <= 0.5:
        raise ValueError("p0 must lie in [0, 1/2]")
    sd = np.sqrt(p0 * (1.0 - p0) / n)
    if sd == 0.0:
        return float(curve.interpolate(p0))
    lo = max(0.0, p0 - 8.0 * sd)
    hi = min(0.5, p0 + 8.0 * sd)
    if points % 2 == 0:
        points += 1
    z = np.linspace(lo, hi, points)
    integrand = curve.interpolate(z) * norm.pdf(z, loc=p0, scale=sd)
    return float(simpson(integrand, x=z))


def awgn_observed_p0(sigma2: float) -> float:
    """Equivalent hard-decision error rate of a BPSK AWGN channel."""
    return float(0.5 - 0.5 * erf(1.0 / np.sqrt(2.0 * sigma2)))


def awgn_sigma2_of_z(z) -> np.ndarray:
    """Channel variance whose hard-decision error rate equals z."""
    z = np.asarray(z, dtype=np.float64)
    return 1.0 / (2.0 * erfinv(1.0 - 2.0 * z) ** 2)


def fl_z_grid(p0_values, n: int, points_per_window: int = 33) -> np.ndarray:
    """Union of integration windows for several operating points."""
    zs = []
    for p0 in p0_values:
        sd = np.sqrt(p0 * (1.0 - p0) / n)
        lo = max(1e-12, p0 - 8.5 * sd)
        hi = min(0.5, p0 + 8.5 * sd)
        zs.append(np.linspace(lo, hi, points_per_window))
    grid = np.unique(np.concatenate(zs))
    return grid


def build_pe_curve(pe_fn, z_grid) -> PeCurve:
    """Evaluate a Pe function once per grid point; the curve is the cache
    reused across blocklengths and operating points."""
    z_grid = np.asarray(z_grid, dtype=np.float64)
    pe = np.array([pe_fn(z) for z in z_grid])
    return PeCurve(z_grid, pe)


def mix_raw(weights, vecs) -> np.ndarray:
    out = weights[0] * vecs[0]
    for w, v in zip(weights[1:], vecs[1:]):
        out = out + w * v
    return out


def irregular_de_step(vn_fn, cn_fn, lambda_edge: dict, rho_edge: dict, state):
    """One irregular DE iteration over any degree-parameterized engine.

    vn_fn(degree, state) and cn_fn(degree, vn_blend) evaluate the engine
    at a single degree; their outputs (tuples of mass vectors) are blended
    by the edge-perspective fractions.  Returns (vn_blend, cn_blend), the
    latter being the next state.
    """
    lam_d = sorted(lambda_edge)
    lam_w = [lambda_edge[d] for d in lam_d]
    rho_d = sorted(rho_edge)
    rho_w = [rho_edge[d] for d in rho_d]
    vn_parts = [vn_fn(d, state) for d in lam_d]
    vn_blend = tuple(
        mix_raw(lam_w, [part[i] for part in vn_parts]) for i in range(len(vn_parts[0]))
    )
    cn_parts = [cn_fn(d, vn_blend) for d in rho_d]
    cn_blend = tuple(
        mix_raw(rho_w, [part[i] for part in cn_parts]) for i in range(len(cn_parts[0]))
    )
    return vn_blend, cn_blend


def degree_rate(lambda_edge: dict, rho_edge: dict) -> float:
    """Design rate 1 - (sum rho_j / j) / (sum lambda_i / i)."""
    sl = sum(w / d for d, w in lambda_edge.items())
    sr = sum(w / d for d, w in rho_edge.items())
    return 1.0 - sr / sl


def run_irregular_minsum(
    sigma2: float,
    lambda_edge: dict,
    rho_edge: dict,
    params: de_minsum.MinSumParams,
    deviation: BitFlipModel,
    all_zero: bool = False,
) -> DeRunResult:
    """Min-Sum DE for an irregular ensemble given by edge-perspective
    degree distributions {degree: edge fraction}.

    Per iteration the degree-wise VN outputs are blended by lambda, the
    deviation matrix applied, and the degree-wise CN outputs blended by
    rho.  The APP error mixes VN degrees by node fractions.
    """
    for dist in (lambda_edge, rho_edge):
        total = sum(dist.values())
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"edge fractions sum to {total}, not 1")
        if any(d < 2 for d in dist):
            raise ValueError("all degrees must be >= 2")
    alphabet = params.alphabet
    t = alphabet.max_index
    init_pair = de_minsum.awgn_initial_density(sigma2, alphabet, params.scaling)
    init0 = init_pair.given0.mass.copy()
    init1 = init_pair.given1.mass.copy()
    if all_zero:
        init1 = init0[::-1].copy()
    pi = build_pi_sign_magnitude(params.q, deviation).matrix

    lam_d = sorted(lambda_edge)
    lam_w = np.array([lambda_edge[d] for d in lam_d])
    rho_d = sorted(rho_edge)
    rho_w = np.array([rho_edge[d] for d in rho_d])
    node_w = lam_w / np.array(lam_d, dtype=float)
    node_w = node_w / node_w.sum()

    pe = np.empty(params.L)
    pe_noisy = np.empty(params.L)
    app = np.empty(params.L)
    drift = 0.0
    q0 = q1 = None
    for ell in range(1, params.L + 1):
        if ell == 1:
            v0, v1 = init0.copy(), init1.copy()
        else:
            v0 = mix_raw(lam_w, [de_minsum._vn_raw(init0, q0, d, t) for d in lam_d])
            v1 = mix_raw(lam_w, [de_minsum._vn_raw(init1, q1, d, t) for d in lam_d])
        drift = max(drift, abs(v0.sum() - 1.0), abs(v1.sum() - 1.0))
        v0 /= v0.sum()
        v1 /= v1.sum()
        if all_zero:
            v1 = v0[::-1]
        pe[ell - 1] = error_probability_raw(v0, v1)

        n0 = v0 @ pi
        n1 = v1 @ pi
        drift = max(drift, abs(n0.sum() - 1.0), abs(n1.sum() - 1.0))
        n0 /= n0.sum()
        n1 /= n1.sum()
        if all_zero:
            n1 = n0[::-1]
        pe_noisy[ell - 1] = error_probability_raw(n0, n1)

        outs = [
            de_minsum._cn_raw(n0, n1, d, params.lambda_plus, params.lambda_minus, t)
            for d in rho_d
        ]
        q0 = mix_raw(rho_w, [o[0] for o in outs])
        q1 = mix_raw(rho_w, [o[1] for o in outs])
        drift = max(drift, abs(q0.sum() - 1.0), abs(q1.sum() - 1.0))
        q0 /= q0.sum()
        q1 /= q1.sum()
        if all_zero:
            q1 = q0[::-1]
        app[ell - 1] = sum(
            w * de_minsum._app_error(init0, init1, q0, q1, d)
            for w, d in zip(node_w, lam_d)
        )

    return DeRunResult(
        pe=pe,
        pe_noisy=pe_noisy,
        app_pe=app,
        meta={
            "decoder": "minsum",
            "sigma2": sigma2,
            "lambda": {str(d): w for d, w in lambda_edge.items()},
            "rho": {str(d): w for d, w in rho_edge.items()},
            "L": params.L,
            "all_zero": all_zero,
            "max_mass_drift": drift,
        },
    )


def append_result_row(path: str, row: dict) -> None:
    """Append a row to the CSV results ledger, creating it on first use.

    The ledger is keyed by a config-hash column supplied by the caller;
    files grow append-only so concurrent readers see complete rows.
    """
    exists = os.path.exists(path)
    fieldnames = list(row)
    if exists:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
        if header:
            fieldnames = header
    with open(path, "a", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fieldnames, extrasaction="ignore")
        if not exists:
            writer.writeheader()
        writer.writerow({k: row.get(k, "") for k in fieldnames})
