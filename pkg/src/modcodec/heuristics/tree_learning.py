"""Greedy MA-tree learning.

Each sample carries its property values and, for every candidate
predictor, the hybrid-uint token of its residual.  A node's cost is the
order-0 entropy of its tokens plus their raw bits under its best predictor.
Splits are taken best-gain-first while the gain (scaled from the sample up
to the full data) pays for the extra nodes.
"""

import heapq
from dataclasses import dataclass
from typing import Dict

import numpy as np

from ..entropy.hybrid import DEFAULT_CONFIG, pack_signed_array, split_tokens_array
from ..modular.channel import INT32_MAX, INT32_MIN, wrap32_array
from ..modular.predictors import WEIGHTED, predict_array
from ..modular.properties import PropertyPlanes
from ..modular.tree import NUM_STATIC_PROPERTIES, Decision, Leaf, MaTree

SPLIT_PREDICTORS = 2            # predictors tried per side when scoring a split
NODE_BITS = 10.0                # signaling estimate per tree node
LEAF_BITS = 44.0                # extra histogram a new leaf usually brings


@dataclass
class SampleSet:
    props: Dict[int, np.ndarray]            # property id -> values
    tokens: Dict[int, np.ndarray]           # predictor -> hybrid token
    raw_bits: Dict[int, np.ndarray]         # predictor -> raw bit count
    weight: float = 1.0                     # full positions per sample

    @property
    def size(self):
        return len(next(iter(self.tokens.values())))


def residual_tokens(a, pred):
    res = pack_signed_array(wrap32_array(np.asarray(a, dtype=np.int64) - pred).reshape(-1))
    tok, nb, _ = split_tokens_array(res, DEFAULT_CONFIG)
    return tok, nb


def gather_samples(tiles, config):
    """Build a :class:`SampleSet` from tiles.

    ``tiles`` yields objects with ``data``, ``channel``, ``stream``, ``prev``
    (list of PrevChannel, most recent first), ``nb`` and ``wp`` (a pair of
    arrays or None).  Positions are subsampled with a fixed stride so at
    most ``config.max_samples`` remain.
    """
    tiles = list(tiles)
    total = sum(t.data.size for t in tiles)
    stride = max(1, -(-total // config.max_samples))
    props = [p for p in config.properties]
    props += [NUM_STATIC_PROPERTIES + k for k in range(4 * config.prev_channels)]
    preds = list(config.predictors)
    pv = {p: [] for p in props}
    tv = {p: [] for p in preds}
    bv = {p: [] for p in preds}
    offset = 0
    for t in tiles:
        n = t.data.size
        start = (-offset) % stride
        offset += n
        if start >= n:
            continue
        sel = np.arange(start, n, stride)
        wp = t.wp
        planes = PropertyPlanes(t.data, t.channel, t.stream, t.prev[:config.prev_channels],
                                wp[1] if wp is not None else None, t.nb)
        for p in props:
            if p == 15 and wp is None:
                pv[p].append(np.zeros(sel.size, dtype=np.int64))
            else:
                pv[p].append(planes(p).reshape(-1)[sel])
        for p in preds:
            if p == WEIGHTED and wp is None:
                raise ValueError("weighted predictor needs WP planes")
            pred = predict_array(p, t.nb, wp[0] if wp is not None else None)
            tok, nb = residual_tokens(t.data.reshape(-1)[sel], pred.reshape(-1)[sel])
            tv[p].append(tok)
            bv[p].append(nb)
    return SampleSet(_concat(pv), _concat(tv), _concat(bv), float(stride))


def _concat(d):
    return {k: np.concatenate(v) if v else np.zeros(0, np.int64) for k, v in d.items()}


def _xlogx_table(n):
    x = np.arange(n + 1, dtype=np.float64)
    x[0] = 1.0
    t = x * np.log2(x)
    return t


def _entropy_rows(h, table):
    """Order-0 coded bits of each histogram row (``table[c] = c log2 c``)."""
    return table[h.sum(axis=-1)] - table[h].sum(axis=-1)


class _Learner:
    def __init__(self, samples, config):
        self.s = samples
        self.cfg = config
        self.preds = sorted(samples.tokens)
        self.props = sorted(samples.props)
        # predictor-major matrices: one bincount covers every predictor
        self.tok = np.stack([samples.tokens[p] for p in self.preds])
        self.bits = np.stack([samples.raw_bits[p] for p in self.preds]).astype(np.float64)
        self.alpha = int(self.tok.max()) + 1 if self.tok.size else 1
        self.xlogx = _xlogx_table(samples.size)
        self._prepare_bins()

    def node_cost(self, idx):
        P, A = len(self.preds), self.alpha
        tok = self.tok[:, idx] + (np.arange(P) * A)[:, None]
        h = np.bincount(tok.reshape(-1), minlength=P * A).reshape(P, A)
        c = _entropy_rows(h, self.xlogx) + self.bits[:, idx].sum(axis=1)
        order = np.argsort(c, kind="stable")
        return float(c[order[0]]), self.preds[order[0]], order[:SPLIT_PREDICTORS]

    def _thresholds(self, v):
        u = np.unique(v)
        if u.size <= 1:
            return u[:0]
        q = self.cfg.thresholds
        if u.size - 1 <= q:
            return u[:-1]
        vs = np.sort(v)
        pos = (np.arange(1, q + 1) * vs.size) // (q + 1)
        cand = np.unique(vs[pos])
        return cand[cand < u[-1]]

    def _prepare_bins(self):
        # candidate split points are quantiles of the whole sample, fixed per property
        self.cand = {}
        self.bins = {}
        for k in self.props:
            v = self.s.props[k]
            cand = self._thresholds(v)
            if cand.size:
                self.cand[k] = cand
                self.bins[k] = np.searchsorted(cand, v, side="left")

    def best_split(self, idx, rows):
        """``(cost, prop, threshold)`` of the cheapest split of ``idx``.

        Only the predictor rows ``rows`` are tried on each side.
        """
        P, A = len(rows), self.alpha
        tok = self.tok[np.ix_(rows, idx)]
        bits = self.bits[np.ix_(rows, idx)]
        best = None
        for k, cand in self.cand.items():
            bins = self.bins[k][idx]
            lo, hi = int(bins.min()), int(bins.max())
            if lo == hi:
                continue
            # only the bins present in this node matter
            bins = bins - lo
            cand = cand[lo:hi]
            B = cand.size
            key = (np.arange(P)[:, None] * (B + 1) + bins[None, :]) * A + tok
            h = np.bincount(key.reshape(-1), minlength=P * (B + 1) * A).reshape(P, B + 1, A)
            suffix = np.cumsum(h[:, ::-1], axis=1)[:, ::-1]
            left = suffix[:, 1:]
            right = suffix[:, :1] - left
            pb = (np.arange(P)[:, None] * (B + 1) + bins[None, :]).reshape(-1)
            rb = np.bincount(pb, weights=bits.reshape(-1), minlength=P * (B + 1)).reshape(P, B + 1)
            rsuf = np.cumsum(rb[:, ::-1], axis=1)[:, ::-1]
            lbits = rsuf[:, 1:]
            rbits = rsuf[:, :1] - lbits
            cl = (_entropy_rows(left, self.xlogx) + lbits).min(axis=0)
            cr = (_entropy_rows(right, self.xlogx) + rbits).min(axis=0)
            j = int(np.argmin(cl + cr))
            c = float(cl[j] + cr[j])
            if best is None or c < best[0]:
                # thresholds must stay signalable (32-bit)
                thr = min(max(int(cand[j]), INT32_MIN), INT32_MAX)
                best = (c, k, thr)
        return best

    def learn(self):
        n = self.s.size
        if n == 0:
            return MaTree.single(self.preds[0])
        w = self.s.weight
        root_idx = np.arange(n)
        cost, pred, rows = self.node_cost(root_idx)
        root = {"idx": root_idx, "cost": cost, "pred": pred, "rows": rows, "depth": 1}
        heap = []
        counter = 0

        def consider(node):
            nonlocal counter
            if node["depth"] >= self.cfg.max_depth or node["idx"].size < 2:
                return
            sp = self.best_split(node["idx"], node["rows"])
            if sp is None:
                return
            gain = (node["cost"] - sp[0]) * w - (2 * NODE_BITS + LEAF_BITS)
            if gain > 0:
                heapq.heappush(heap, (-gain, counter, node, sp))
                counter += 1

        consider(root)
        leaves = 1
        while heap and leaves < self.cfg.max_leaves:
            _, _, node, (_, k, thr) = heapq.heappop(heap)
            v = self.s.props[k][node["idx"]]
            go_left = v > thr
            kids = []
            for mask in (go_left, ~go_left):
                sub = node["idx"][mask]
                cost, pred, rows = self.node_cost(sub)
                kids.append({"idx": sub, "cost": cost, "pred": pred, "rows": rows,
                             "depth": node["depth"] + 1})
            node["split"] = (k, thr, kids[0], kids[1])
            leaves += 1
            for kid in kids:
                consider(kid)
        return MaTree(_build(root))


def _build(node):
    if "split" not in node:
        return Leaf(node["pred"])
    k, thr, left, right = node["split"]
    return Decision(k, thr, _build(left), _build(right))


def learn_tree(samples, config):
    """Greedy top-down tree over ``samples``; deterministic for a given input."""
    return _Learner(samples, config).learn()
