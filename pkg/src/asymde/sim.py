"""Finite-length Monte-Carlo simulation of faulty LDPC decoders.

Random information words are encoded, sent through the channel, and
decoded by flooding Gallager B or quantized offset Min-Sum decoders with
deviations injected per message.  All randomness comes from counter-based
streams keyed by (seed, frame, iteration, purpose), so any frame is
bit-reproducible in isolation and trial blocks can run in parallel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .channels import Awgn, Bsc, transmit
from .codes import Encoder, TannerGraph
from .de_gallager_b import GallagerBParams
from .de_minsum import MinSumParams
from .deviations import BitFlipModel, sample_bit_flips, sample_hard_flips

_STREAM_INFO = 0
_STREAM_CHANNEL = 1
_STREAM_DEVIATION = 2
_STREAM_TIEBREAK = 3


def stream(seed: int, frame: int, iteration: int, purpose: int) -> np.random.Generator:
    """Counter-based generator: reproducible per (seed, frame, iteration, purpose).

    The low counter word advances as values are drawn, so the stream
    coordinates occupy the high words; streams never overlap as long as a
    single stream draws fewer than 2^64 blocks.
    """
    counter = np.array([0, purpose, iteration, frame], dtype=np.uint64)
    bg = np.random.Philox(key=np.uint64(seed), counter=counter)
    return np.random.Generator(bg)


class EdgeGraph:
    """Edge-array view of a Tanner graph for vectorized flooding decoders."""

    def __init__(self, graph: TannerGraph):
        self.n = graph.n
        self.m = graph.m
        edge_vn, edge_cn = graph.edge_arrays()
        self.edge_vn = edge_vn
        self.edge_cn = edge_cn
        self.n_edges = edge_vn.size
        self.vn_deg = graph.vn_degrees
        self.cn_deg = graph.cn_degrees
        # Edges are grouped by check node for segment reductions.
        self.cn_starts = np.concatenate(([0], np.cumsum(self.cn_deg)))[:-1]

    def syndrome_ok(self, decisions: np.ndarray) -> bool:
        par = np.bincount(self.edge_cn, weights=decisions[self.edge_vn], minlength=self.m)
        return bool(np.all(par.astype(np.int64) % 2 == 0))


def decode_gallager_b(
    edges: EdgeGraph,
    received: np.ndarray,
    params: GallagerBParams,
    deviation: BitFlipModel,
    seed: int,
    frame: int = 0,
    early_exit: bool = True,
):
    """Flooding Gallager B with per-message CN output flips.

    The hard decision is the majority of the channel bit and all incoming
    noisy CN messages, ties resolved to the channel bit.  Returns
    (decisions, iterations_used, syndrome_ok).
    """
    y = np.asarray(received, dtype=np.int64)
    init_edge = y[edges.edge_vn]
    msgs = init_edge.copy()  # first iteration forwards the channel bit
    decisions = y.copy()
    for ell in range(1, params.L + 1):
        if ell > 1:
            b0, b1 = params.threshold_at(ell)
            ones_vn = np.bincount(edges.edge_vn, weights=noisy, minlength=edges.n)
            ext_ones = ones_vn[edges.edge_vn].astype(np.int64) - noisy
            ext_deg = edges.vn_deg[edges.edge_vn] - 1
            flip0 = ext_ones >= b0
            flip1 = (ext_deg - ext_ones) >= b1
            msgs = np.where(init_edge == 0, flip0.astype(np.int64),
                            1 - flip1.astype(np.int64))
        parity = np.bincount(edges.edge_cn, weights=msgs, minlength=edges.m)
        parity = parity.astype(np.int64) % 2
        ext = parity[edges.edge_cn] ^ msgs
        rng = stream(seed, frame, ell, _STREAM_DEVIATION)
        noisy = sample_hard_flips(ext, deviation, rng)

        ones_all = np.bincount(edges.edge_vn, weights=noisy, minlength=edges.n)
        votes1 = ones_all.astype(np.int64) + y
        total = edges.vn_deg + 1
        decisions = np.where(2 * votes1 > total, 1,
                             np.where(2 * votes1 < total, 0, y)).astype(np.int64)
        if early_exit and edges.syndrome_ok(decisions):
            return decisions, ell, True
    return decisions, params.L, edges.syndrome_ok(decisions)


def _cn_minsum(edges: EdgeGraph, noisy: np.ndarray, lam_plus: int, lam_minus: int):
    """Extrinsic CN outputs: sign product and offset minimum, per edge."""
    absv = np.abs(noisy)
    pos = np.arange(edges.n_edges)
    m1 = np.minimum.reduceat(absv, edges.cn_starts)
    is_min = absv == m1[edges.edge_cn]
    first_idx = np.minimum.reduceat(np.where(is_min, pos, edges.n_edges),
                                    edges.cn_starts)
    masked = absv.copy()
    masked[first_idx] = np.iinfo(np.int64).max
    m2 = np.minimum.reduceat(masked, edges.cn_starts)
    ext_min = np.where(pos == first_idx[edges.edge_cn], m2[edges.edge_cn],
                       m1[edges.edge_cn])

    neg = (noisy < 0).astype(np.int64)
    zero = (noisy == 0).astype(np.int64)
    neg_cn = np.bincount(edges.edge_cn, weights=neg, minlength=edges.m).astype(np.int64)
    zero_cn = np.bincount(edges.edge_cn, weights=zero, minlength=edges.m).astype(np.int64)
    ext_zero = zero_cn[edges.edge_cn] - zero
    ext_neg = neg_cn[edges.edge_cn] - neg
    sign = np.where(ext_zero > 0, 0, 1 - 2 * (ext_neg % 2))
    lam = np.where(sign > 0, lam_plus, lam_minus)
    return sign * np.maximum(ext_min - lam, 0)


def decode_minsum(
    edges: EdgeGraph,
    received_llr_idx: np.ndarray,
    params: MinSumParams,
    deviation: BitFlipModel,
    seed: int,
    frame: int = 0,
    early_exit: bool = True,
    deviation_counter=None,
):
    """Flooding quantized offset Min-Sum in index arithmetic.

    Every VN-to-CN message passes through per-bit sign-magnitude flips.
    The APP is the saturated sum of the channel term and all CN inputs;
    decision is its sign, ties resolved by a fair coin.  Returns
    (decisions, iterations_used, syndrome_ok).

    deviation_counter, if given, is a (size, size) array accumulating
    (clean, noisy) message index pairs for instrumentation.
    """
    t = 2 ** (params.q - 1) - 1
    init = np.asarray(received_llr_idx, dtype=np.int64)
    init_edge = init[edges.edge_vn]
    msgs = init_edge.copy()
    decisions = (init < 0).astype(np.int64)
    cn_msgs = None
    for ell in range(1, params.L + 1):
        if ell > 1:
            tot = init + np.bincount(edges.edge_vn, weights=cn_msgs,
                                     minlength=edges.n).astype(np.int64)
            msgs = np.clip(tot[edges.edge_vn] - cn_msgs, -t, t)
        rng = stream(seed, frame, ell, _STREAM_DEVIATION)
        noisy = sample_bit_flips(msgs, params.q, deviation, rng)
        if deviation_counter is not None:
            np.add.at(deviation_counter, (msgs + t, noisy + t), 1)
        cn_msgs = _cn_minsum(edges, noisy, params.lambda_plus, params.lambda_minus)

        app = init + np.bincount(edges.edge_vn, weights=cn_msgs,
                                 minlength=edges.n).astype(np.int64)
        ties = app == 0
        decisions = (app < 0).astype(np.int64)
        if ties.any():
            coin = stream(seed, frame, ell, _STREAM_TIEBREAK)
            decisions[ties] = coin.integers(0, 2, int(ties.sum()))
        if early_exit and edges.syndrome_ok(decisions):
            return decisions, ell, True
    return decisions, params.L, edges.syndrome_ok(decisions)


def quantize_llrs(y: np.ndarray, sigma2: float, params: MinSumParams) -> np.ndarray:
    """Channel outputs to initial message indices with sign-scaled LLRs."""
    t = 2 ** (params.q - 1) - 1
    gamma = np.where(y >= 0, params.gamma0, params.gamma1)
    z = 2.0 * gamma * y / sigma2
    return np.clip(np.floor(z / params.step + 0.5), -t, t).astype(np.int64)


@dataclass
class SimConfig:
    """One BER experiment: code, channel points, decoder, deviations, budget.

    early_exit stops a frame at the first zero syndrome, as a deployed
    decoder would.  Disabling it measures the final-iteration decision,
    the quantity the no-stopping DE analysis predicts.
    """

    graph: TannerGraph
    encoder: Encoder
    channel_points: list
    decoder: object  # GallagerBParams or MinSumParams
    deviation: BitFlipModel
    seed: int = 0
    max_frames: int = 10_000_000
    target_frame_errors: int = 100
    early_exit: bool = True

    def __post_init__(self):
        if self.target_frame_errors < 50:
            raise ValueError("target error count below the statistical floor of 50")
        if not self.channel_points:
            raise ValueError("no channel points given")


@dataclass
class BerPoint:
    channel_param: float
    ber: float
    fer: float
    frames: int
    bit_errors: int
    frame_errors: int
    ci_lo: float
    ci_hi: float
    flags: list = field(default_factory=list)


def wilson_interval(errors: int, trials: int, z: float = 1.96):
    """Wilson 95% score interval for a binomial proportion."""
    if trials == 0:
        return 0.0, 1.0
    p = errors / trials
    denom = 1.0 + z**2 / trials
    center = (p + z**2 / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z**2 / (4 * trials**2)) / denom
    return max(0.0, center - half), min(1.0, center + half)


def _decode_frame(config: SimConfig, edges: EdgeGraph, channel, frame: int):
    rng_info = stream(config.seed, frame, 0, _STREAM_INFO)
    info = rng_info.integers(0, 2, config.encoder.k).astype(np.uint8)
    codeword = config.encoder.encode(info)
    rng_ch = stream(config.seed, frame, 0, _STREAM_CHANNEL)
    received = transmit(channel, codeword, rng_ch)
    if isinstance(config.decoder, MinSumParams):
        idx = quantize_llrs(received, channel.sigma2, config.decoder)
        decisions, _, _ = decode_minsum(
            edges, idx, config.decoder, config.deviation, config.seed, frame,
            early_exit=config.early_exit,
        )
    else:
        decisions, _, _ = decode_gallager_b(
            edges, received, config.decoder, config.deviation, config.seed, frame,
            early_exit=config.early_exit,
        )
    return int(np.count_nonzero(decisions != codeword))


def _run_point(config: SimConfig, point_index: int, param: float) -> BerPoint:
    edges = EdgeGraph(config.graph)
    if isinstance(config.decoder, MinSumParams):
        channel = Awgn(param)
    else:
        channel = Bsc(param)
    bit_errors = 0
    frame_errors = 0
    frames = 0
    # Frames are indexed per point so the stream layout is stable whether
    # points run sequentially or in parallel.
    base = (point_index + 1) << 32
    while frames < config.max_frames and frame_errors < config.target_frame_errors:
        nerr = _decode_frame(config, edges, channel, base + frames)
        frames += 1
        bit_errors += nerr
        frame_errors += int(nerr > 0)
    n_bits = frames * config.graph.n
    ber = bit_errors / n_bits if n_bits else 0.0
    fer = frame_errors / frames if frames else 0.0
    lo, hi = wilson_interval(bit_errors, n_bits)
    flags = []
    if frame_errors == 0:
        flags.append("no errors observed")
    elif frame_errors < config.target_frame_errors:
        flags.append("partial: frame budget reached before target errors")
    return BerPoint(param, ber, fer, frames, bit_errors, frame_errors, lo, hi, flags)


def ber_experiment(config: SimConfig, workers: int = 1) -> list:
    """Monte-Carlo BER/FER per channel point with Wilson 95% intervals.

    Each point runs until target_frame_errors frame errors or max_frames
    frames; a point stopped by the frame budget is flagged partial, and a
    point with zero observed errors is flagged explicitly.  Points are
    independent and run in a process pool when workers > 1; results do
    not depend on the worker count.
    """
    jobs = list(enumerate(config.channel_points))
    if workers > 1 and len(jobs) > 1:
        import multiprocessing as mp

        with mp.Pool(min(workers, len(jobs))) as pool:
            return pool.starmap(_run_point, [(config, i, p) for i, p in jobs])
    return [_run_point(config, i, p) for i, p in jobs]


def ber_rows_csv(results: list) -> str:
    header = "channel_param,ber,fer,frames,bit_errors,frame_errors,ci_lo,ci_hi,flags"
    lines = [header]
    for r in results:
        lines.append(
            f"{r.channel_param!r},{r.ber!r},{r.fer!r},{r.frames},{r.bit_errors},"
            f"{r.frame_errors},{r.ci_lo!r},{r.ci_hi!r},{';'.join(r.flags)}"
        )
    return "\n".join(lines) + "\n"
