"""LDPC code objects: degree distributions, PEG graphs, GF(2) encoding.

Graphs are built with the progressive-edge-growth greedy rule (each new
edge attaches to a check node as far as possible from the variable node
in the current graph, breaking ties by lowest current degree then lowest
index), which maximizes local girth.  Encoders come from a bit-packed
GF(2) row reduction of H and can be cached to a sidecar file keyed by a
hash of the graph.
"""

from __future__ import annotations

import hashlib
import math
import os
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class DegreeDistribution:
    """Edge-perspective degree fractions: vn_edge[i] (lambda) and cn_edge[j] (rho)."""

    vn_edge: dict
    cn_edge: dict

    def __post_init__(self):
        for dist, side in ((self.vn_edge, "VN"), (self.cn_edge, "CN")):
            if not dist:
                raise ValueError(f"{side} distribution is empty")
            if any(d < 2 for d in dist):
                raise ValueError(f"{side} degrees must be >= 2")
            if any(w < 0 for w in dist.values()):
                raise ValueError(f"{side} fractions must be nonnegative")
            total = sum(dist.values())
            if abs(total - 1.0) > 1e-9:
                raise ValueError(f"{side} fractions sum to {total}, not 1")
        rate = self.design_rate
        if not 0.0 < rate < 1.0:
            raise ValueError(f"design rate {rate} outside (0, 1)")

    @classmethod
    def regular(cls, dv: int, dc: int) -> "DegreeDistribution":
        return cls({dv: 1.0}, {dc: 1.0})

    @property
    def is_regular(self) -> bool:
        return len(self.vn_edge) == 1 and len(self.cn_edge) == 1

    @property
    def design_rate(self) -> float:
        sl = sum(w / d for d, w in self.vn_edge.items())
        sr = sum(w / d for d, w in self.cn_edge.items())
        return 1.0 - sr / sl

    def vn_node_fractions(self) -> dict:
        weights = {d: w / d for d, w in self.vn_edge.items()}
        total = sum(weights.values())
        return {d: w / total for d, w in weights.items()}

    def cn_node_fractions(self) -> dict:
        weights = {d: w / d for d, w in self.cn_edge.items()}
        total = sum(weights.values())
        return {d: w / total for d, w in weights.items()}


def _largest_remainder_counts(fractions: dict, total: int) -> dict:
    """Integer counts per degree summing to `total`, largest remainder rule."""
    degrees = sorted(fractions)
    raw = {d: fractions[d] * total for d in degrees}
    counts = {d: int(math.floor(raw[d])) for d in degrees}
    short = total - sum(counts.values())
    order = sorted(degrees, key=lambda d: (-(raw[d] - counts[d]), d))
    for d in order[:short]:
        counts[d] += 1
    return counts


class TannerGraph:
    """Sparse bipartite graph: n variable nodes, m check nodes."""

    def __init__(self, n: int, m: int, cn_adj):
        self.n = n
        self.m = m
        self.cn_adj = [np.asarray(sorted(a), dtype=np.int64) for a in cn_adj]
        if len(self.cn_adj) != m:
            raise ValueError("adjacency length does not match check count")
        vn_lists = [[] for _ in range(n)]
        for c, vs in enumerate(self.cn_adj):
            if len(set(vs.tolist())) != len(vs):
                raise ValueError(f"duplicate edge at check node {c}")
            if vs.size and (vs.min() < 0 or vs.max() >= n):
                raise ValueError("variable index out of range")
            for v in vs:
                vn_lists[v].append(c)
        self.vn_adj = [np.asarray(a, dtype=np.int64) for a in vn_lists]
        self.vn_degrees = np.array([a.size for a in self.vn_adj])
        self.cn_degrees = np.array([a.size for a in self.cn_adj])
        self.n_edges = int(self.cn_degrees.sum())

    def edge_arrays(self):
        """(edge_vn, edge_cn) sorted by check node, then variable node."""
        edge_cn = np.repeat(np.arange(self.m), self.cn_degrees)
        edge_vn = np.concatenate(self.cn_adj) if self.m else np.empty(0, dtype=np.int64)
        return edge_vn.astype(np.int64), edge_cn.astype(np.int64)

    def h_dense(self) -> np.ndarray:
        h = np.zeros((self.m, self.n), dtype=np.uint8)
        for c, vs in enumerate(self.cn_adj):
            h[c, vs] = 1
        return h

    def syndrome(self, word: np.ndarray) -> np.ndarray:
        word = np.asarray(word)
        return np.array([word[vs].sum() % 2 for vs in self.cn_adj], dtype=np.uint8)

    def to_alist(self) -> str:
        """Standard alist text (1-based indices, zero-padded rows)."""
        dv_max = int(self.vn_degrees.max()) if self.n else 0
        dc_max = int(self.cn_degrees.max()) if self.m else 0
        lines = [f"{self.n} {self.m}", f"{dv_max} {dc_max}"]
        lines.append(" ".join(str(d) for d in self.vn_degrees))
        lines.append(" ".join(str(d) for d in self.cn_degrees))
        for a in self.vn_adj:
            row = [str(c + 1) for c in a] + ["0"] * (dv_max - a.size)
            lines.append(" ".join(row))
        for a in self.cn_adj:
            row = [str(v + 1) for v in a] + ["0"] * (dc_max - a.size)
            lines.append(" ".join(row))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_alist(cls, text: str) -> "TannerGraph":
        tokens = text.split()
        pos = 0

        def take(k):
            nonlocal pos
            out = tokens[pos : pos + k]
            pos += k
            return [int(t) for t in out]

        n, m = take(2)
        dv_max, dc_max = take(2)
        vn_deg = take(n)
        cn_deg = take(m)
        # VN adjacency lists may or may not be zero-padded.
        remaining = len(tokens) - pos
        padded = remaining == n * dv_max + m * dc_max
        vn_rows = []
        for i in range(n):
            row = take(dv_max) if padded else take(vn_deg[i])
            vn_rows.append([x - 1 for x in row if x > 0])
        cn_rows = []
        for j in range(m):
            row = take(dc_max) if padded else take(cn_deg[j])
            cn_rows.append([x - 1 for x in row if x > 0])
        graph = cls(n, m, cn_rows)
        if not np.array_equal(graph.vn_degrees, np.array(vn_deg)):
            raise ValueError("alist VN degrees inconsistent with adjacency")
        return graph

    def save_alist(self, path: str) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_alist())

    @classmethod
    def load_alist(cls, path: str) -> "TannerGraph":
        with open(path) as fh:
            return cls.from_alist(fh.read())

    def content_hash(self) -> str:
        return hashlib.sha256(self.to_alist().encode()).hexdigest()


def _cn_targets(dd: DegreeDistribution, n_edges: int):
    """Check count and per-check target degrees realizing the CN profile."""
    if dd.is_regular:
        (dc,) = dd.cn_edge
        if n_edges % dc != 0:
            raise ValueError(
                f"infeasible profile: {n_edges} edges not a multiple of dc={dc}"
            )
        m = n_edges // dc
        return m, np.full(m, dc, dtype=np.int64)
    node_fracs = dd.cn_node_fractions()
    m = round(n_edges * sum(w / d for d, w in dd.cn_edge.items()))
    counts = _largest_remainder_counts(node_fracs, m)
    targets = np.array(
        [d for d in sorted(counts) for _ in range(counts[d])], dtype=np.int64
    )
    # Rounding can leave a few edges unassigned; spread them deterministically.
    diff = n_edges - int(targets.sum())
    i = 0
    while diff != 0:
        targets[i % m] += 1 if diff > 0 else -1
        diff += -1 if diff > 0 else 1
        i += 1
    if targets.min() < 1:
        raise ValueError("infeasible CN profile after rounding")
    return m, targets


def peg_construct(
    n: int, dd: DegreeDistribution, seed: int = 0, repair_girth: int = 8
) -> TannerGraph:
    """Progressive-edge-growth construction of a Tanner graph.

    Variable nodes are processed in increasing degree order; each edge
    attaches to an unsaturated check node outside the BFS neighbourhood of
    the variable node when one exists, otherwise to one at maximal depth.
    Remaining ties break by lowest current degree, then lowest index, so
    the construction is deterministic (the seed is accepted for API
    stability and recorded by callers).

    The exact degree profile forces the last few edges into nearly
    saturated neighbourhoods, so placements that closed a cycle shorter
    than repair_girth are afterwards re-routed by degree-preserving edge
    swaps when a distant partner edge exists.
    """
    vn_counts = _largest_remainder_counts(dd.vn_node_fractions(), n)
    vn_degrees = np.array(
        [d for d in sorted(vn_counts) for _ in range(vn_counts[d])], dtype=np.int64
    )
    if vn_degrees.size != n:
        raise ValueError("could not realize VN degree profile")
    n_edges = int(vn_degrees.sum())
    m, targets = _cn_targets(dd, n_edges)
    if n < int(vn_degrees.max()) or m < 1:
        raise ValueError("graph too small for requested degrees")
    if int(vn_degrees.max()) > m:
        raise ValueError("VN degree exceeds check count; duplicate edges forced")

    max_dv = int(vn_degrees.max())
    max_dc = int(targets.max())
    vn_nbrs = np.full((n, max_dv), -1, dtype=np.int64)
    cn_nbrs = np.full((m, max_dc), -1, dtype=np.int64)
    vn_fill = np.zeros(n, dtype=np.int64)
    cn_fill = np.zeros(m, dtype=np.int64)

    def candidate_checks(v, unsat):
        """Admissible check nodes for the next edge of v, and the cycle
        length its placement would close (inf when outside the component).

        BFS over the current graph; expansion stops as soon as every
        unsaturated check node has been reached.  Preference order:
        unsaturated checks outside the neighbourhood, else those in the
        deepest layer that contains any (never depth 1, the current
        neighbours of v).
        """
        seen_vn = np.zeros(n, dtype=bool)
        seen_cn = np.zeros(m, dtype=bool)
        seen_vn[v] = True
        frontier = np.array([v], dtype=np.int64)
        unsat_left = int(unsat.sum())
        last_unsat_layer = np.empty(0, dtype=np.int64)
        last_depth = 0
        depth = 0
        while frontier.size and unsat_left > 0:
            nb = vn_nbrs[frontier, :].ravel()
            nb = nb[nb >= 0]
            if nb.size == 0:
                break
            mask = np.zeros(m, dtype=bool)
            mask[nb] = True
            mask &= ~seen_cn
            if not mask.any():
                break
            new_cn = np.flatnonzero(mask)
            seen_cn[new_cn] = True
            depth += 1
            hits = new_cn[unsat[new_cn]]
            if hits.size:
                unsat_left -= hits.size
                if depth > 1:
                    last_unsat_layer = hits
                    last_depth = depth
            if unsat_left == 0:
                break
            nb2 = cn_nbrs[new_cn, :].ravel()
            nb2 = nb2[nb2 >= 0]
            vmask = np.zeros(n, dtype=bool)
            vmask[nb2] = True
            vmask &= ~seen_vn
            frontier = np.flatnonzero(vmask)
            seen_vn[frontier] = True
        if unsat_left > 0:
            return np.flatnonzero(unsat & ~seen_cn), math.inf
        # Distance to a depth-d check node is 2d-1; closing it makes a 2d cycle.
        return last_unsat_layer, 2 * last_depth

    def remove_edge(v, c):
        row = vn_nbrs[v]
        i = int(np.flatnonzero(row[: vn_fill[v]] == c)[0])
        row[i] = row[vn_fill[v] - 1]
        row[vn_fill[v] - 1] = -1
        vn_fill[v] -= 1
        row = cn_nbrs[c]
        i = int(np.flatnonzero(row[: cn_fill[c]] == v)[0])
        row[i] = row[cn_fill[c] - 1]
        row[cn_fill[c] - 1] = -1
        cn_fill[c] -= 1

    def add_edge(v, c):
        vn_nbrs[v, vn_fill[v]] = c
        cn_nbrs[c, cn_fill[c]] = v
        vn_fill[v] += 1
        cn_fill[c] += 1

    def distances_from_vn(v):
        """(CN distances, VN distances) by BFS; unreached stay at -1."""
        dist_cn = np.full(m, -1, dtype=np.int64)
        dist_vn = np.full(n, -1, dtype=np.int64)
        dist_vn[v] = 0
        frontier = np.array([v], dtype=np.int64)
        d = 0
        while frontier.size:
            nb = vn_nbrs[frontier, :].ravel()
            nb = nb[nb >= 0]
            new_cn = np.unique(nb[dist_cn[nb] < 0]) if nb.size else nb
            if new_cn.size == 0:
                break
            d += 1
            dist_cn[new_cn] = d
            nb2 = cn_nbrs[new_cn, :].ravel()
            nb2 = nb2[nb2 >= 0]
            new_vn = np.unique(nb2[dist_vn[nb2] < 0]) if nb2.size else nb2
            if new_vn.size == 0:
                break
            d += 1
            dist_vn[new_vn] = d
            frontier = new_vn
        return dist_cn, dist_vn

    def try_swap(v, c, min_girth):
        """Re-route edge (v, c) through a distant partner edge (u, e).

        The swap to (v, e) and (u, c) keeps every degree and is accepted
        only when both new placements close no cycle shorter than
        min_girth; conservative because removing the partner edge can
        only increase distances.
        """
        remove_edge(v, c)
        dist_cn_v, _ = distances_from_vn(v)
        dist_vn_c = None
        my_cns = set(vn_nbrs[v, : vn_fill[v]].tolist())
        for e in range(m):
            if e == c or e in my_cns:
                continue
            if 0 <= dist_cn_v[e] < min_girth - 1:
                continue
            if dist_vn_c is None:
                # BFS from c over the graph without (v, c): distances of
                # candidate partners u to the check node c.
                dist_vn_c = _distances_from_cn(c)
            for u in sorted(cn_nbrs[e, : cn_fill[e]].tolist()):
                if u == v:
                    continue
                if c in vn_nbrs[u, : vn_fill[u]]:
                    continue
                du = dist_vn_c[u]
                if 0 <= du < min_girth - 1:
                    continue
                remove_edge(u, e)
                add_edge(v, e)
                add_edge(u, c)
                return True
        add_edge(v, c)
        return False

    def _distances_from_cn(c):
        dist_vn = np.full(n, -1, dtype=np.int64)
        dist_cn = np.full(m, -1, dtype=np.int64)
        dist_cn[c] = 0
        frontier_cn = np.array([c], dtype=np.int64)
        d = 0
        while frontier_cn.size:
            nb = cn_nbrs[frontier_cn, :].ravel()
            nb = nb[nb >= 0]
            new_vn = np.unique(nb[dist_vn[nb] < 0]) if nb.size else nb
            if new_vn.size == 0:
                break
            d += 1
            dist_vn[new_vn] = d
            nb2 = vn_nbrs[new_vn, :].ravel()
            nb2 = nb2[nb2 >= 0]
            new_cn = np.unique(nb2[dist_cn[nb2] < 0]) if nb2.size else nb2
            if new_cn.size == 0:
                break
            d += 1
            dist_cn[new_cn] = d
            frontier_cn = new_cn
        return dist_vn

    order = np.argsort(vn_degrees, kind="stable")
    short_placements = []
    for v in order:
        for _ in range(vn_degrees[v]):
            unsat = cn_fill < targets
            cands, cycle_len = candidate_checks(v, unsat)
            if cands.size == 0:
                raise ValueError("infeasible profile: no admissible check node")
            degs = cn_fill[cands]
            cands = cands[degs == degs.min()]
            c = int(cands.min())
            add_edge(v, c)
            if cycle_len < repair_girth:
                short_placements.append((int(cycle_len), v, c))

    for cycle_len, v, c in sorted(short_placements):
        if c not in vn_nbrs[v, : vn_fill[v]]:
            continue  # already re-routed as a partner of an earlier swap
        for target in range(repair_girth, cycle_len, -2):
            if try_swap(v, c, target):
                break

    cn_adj = [cn_nbrs[c, : cn_fill[c]] for c in range(m)]
    return TannerGraph(n, m, cn_adj)


def girth(graph: TannerGraph) -> float:
    """Length of the shortest cycle; inf for forests.

    BFS from every variable node; the first layer in which a node is
    generated along two distinct paths witnesses a cycle of twice that
    depth, and the minimum over sources is exact.
    """
    best = math.inf
    for v in range(graph.n):
        seen_vn = np.zeros(graph.n, dtype=bool)
        seen_cn = np.zeros(graph.m, dtype=bool)
        seen_vn[v] = True
        frontier_vn = np.array([v], dtype=np.int64)
        depth = 0
        while frontier_vn.size:
            depth += 1  # VN -> CN layer
            if 2 * depth >= best:
                break
            cand = (
                np.concatenate([graph.vn_adj[u] for u in frontier_vn])
                if frontier_vn.size
                else np.empty(0, dtype=np.int64)
            )
            cand = cand[~seen_cn[cand]]
            uniq, counts = np.unique(cand, return_counts=True)
            if np.any(counts > 1):
                best = min(best, 2 * depth)
                break
            seen_cn[uniq] = True

            depth += 1  # CN -> VN layer
            if 2 * depth >= best:
                break
            cand = (
                np.concatenate([graph.cn_adj[c] for c in uniq])
                if uniq.size
                else np.empty(0, dtype=np.int64)
            )
            cand = cand[~seen_vn[cand]]
            uniq2, counts = np.unique(cand, return_counts=True)
            if np.any(counts > 1):
                best = min(best, 2 * depth)
                break
            seen_vn[uniq2] = True
            frontier_vn = uniq2
    return best


def _pack_rows(h: np.ndarray) -> np.ndarray:
    return np.packbits(h, axis=1)


class Encoder:
    """Systematic-where-possible GF(2) encoder derived from H.

    Information bits occupy the non-pivot columns of the reduced H; rank
    deficiencies enlarge k = n - rank(H) relative to n - m.
    """

    def __init__(self, n: int, info_positions: np.ndarray, g_packed: np.ndarray):
        self.n = n
        self.info_positions = np.asarray(info_positions, dtype=np.int64)
        self.k = int(self.info_positions.size)
        self._g_packed = g_packed

    @property
    def rate(self) -> float:
        return self.k / self.n

    def encode(self, info_bits: np.ndarray) -> np.ndarray:
        info_bits = np.asarray(info_bits, dtype=np.uint8)
        if info_bits.shape != (self.k,):
            raise ValueError(f"expected {self.k} information bits")
        sel = self._g_packed[info_bits.astype(bool)]
        if sel.shape[0] == 0:
            return np.zeros(self.n, dtype=np.uint8)
        packed = np.bitwise_xor.reduce(sel, axis=0)
        return np.unpackbits(packed)[: self.n]

    def save(self, path: str) -> None:
        np.savez_compressed(
            path, n=self.n, info_positions=self.info_positions, g_packed=self._g_packed
        )

    @classmethod
    def load(cls, path: str) -> "Encoder":
        doc = np.load(path)
        return cls(int(doc["n"]), doc["info_positions"], doc["g_packed"])


def _rref_packed(h: np.ndarray):
    """Bit-packed GF(2) row reduction; returns (reduced rows, pivot columns)."""
    m, n = h.shape
    hp = _pack_rows(h)
    pivots = []
    r = 0
    for col in range(n):
        if r == m:
            break
        byte, bit = divmod(col, 8)
        mask = np.uint8(128 >> bit)
        nz = np.flatnonzero(hp[r:, byte] & mask)
        if nz.size == 0:
            continue
        p = r + int(nz[0])
        if p != r:
            hp[[r, p]] = hp[[p, r]]
        rows = np.flatnonzero(hp[:, byte] & mask)
        rows = rows[rows != r]
        if rows.size:
            hp[rows] ^= hp[r]
        pivots.append(col)
        r += 1
    return hp[:r], np.array(pivots, dtype=np.int64)


def build_encoder(graph: TannerGraph, cache_dir: str | None = None) -> Encoder:
    """Generator for the null space of H, optionally cached on disk.

    The cache key is a hash of the graph's alist serialization, so a
    reconstructed identical graph reuses the stored generator.
    """
    if cache_dir is not None:
        os.makedirs(cache_dir, exist_ok=True)
        path = os.path.join(cache_dir, graph.content_hash() + ".genmat.npz")
        if os.path.exists(path):
            return Encoder.load(path)
    h = graph.h_dense()
    reduced, pivots = _rref_packed(h)
    rank = reduced.shape[0]
    unpacked = (
        np.unpackbits(reduced, axis=1)[:, : graph.n]
        if rank
        else np.zeros((0, graph.n), dtype=np.uint8)
    )
    free = np.setdiff1d(np.arange(graph.n), pivots)
    g = np.zeros((free.size, graph.n), dtype=np.uint8)
    for j, f in enumerate(free):
        g[j, f] = 1
        if rank:
            g[j, pivots] = unpacked[:, f]
    enc = Encoder(graph.n, free, _pack_rows(g) if free.size else
                  np.zeros((0, (graph.n + 7) // 8), dtype=np.uint8))
    if cache_dir is not None:
        enc.save(path)
    return enc
