"""Transform chain selection."""

import numpy as np

from ..entropy.hybrid import DEFAULT_CONFIG, pack_signed_array, split_tokens_array
from ..modular.predictors import GRADIENT, neighbor_arrays, predict_array
from ..transforms.chain import Palette, Rct, Squeeze
from ..transforms.rct import forward_triple

SCORE_PIXELS = 1 << 16


def count_colors(planes, limit=None):
    """Number of distinct tuples across ``planes`` (2D arrays of equal shape).

    Returns ``limit + 1`` as soon as more than ``limit`` colors are known to exist.
    """
    stack = np.stack([np.asarray(p, dtype=np.int64).reshape(-1) for p in planes], axis=1)
    if limit is not None and stack.shape[0] > 4 * limit:
        # a cheap early exit on a prefix
        head = np.unique(stack[: 4 * limit], axis=0).shape[0]
        if head > limit:
            return limit + 1
    return np.unique(stack, axis=0).shape[0]


def residual_cost(plane):
    """Order-0 bits of the Gradient residuals of one plane (tokens plus raw bits)."""
    plane = np.asarray(plane, dtype=np.int64)
    pred = predict_array(GRADIENT, neighbor_arrays(plane))
    tok, nb, _ = split_tokens_array(pack_signed_array((plane - pred).reshape(-1)), DEFAULT_CONFIG)
    counts = np.bincount(tok).astype(np.float64)
    counts = counts[counts > 0]
    total = counts.sum()
    return float(-(counts * np.log2(counts / total)).sum() + nb.sum())


def _subsample(planes):
    h, w = planes[0].shape
    if h * w <= SCORE_PIXELS:
        return planes
    rows = max(1, SCORE_PIXELS // max(w, 1))
    # evenly spread blocks of consecutive rows keep the neighbourhoods intact
    starts = np.linspace(0, max(h - 8, 0), num=max(1, rows // 8)).astype(int)
    sel = np.unique(np.concatenate([np.arange(s, min(h, s + 8)) for s in starts]))
    return [p[sel] for p in planes]


def rct_scores(planes, candidates):
    """Entropy score of every candidate RCT on three planes (lower is better)."""
    r, g, b = _subsample([np.asarray(p, dtype=np.int64) for p in planes])
    out = {}
    for t in candidates:
        out[t] = sum(residual_cost(c) for c in forward_triple(r, g, b, t))
    return out


def choose_rct(planes, candidates):
    scores = rct_scores(planes, candidates)
    return min(sorted(scores), key=lambda t: scores[t]), scores


def palette_worthwhile(colors, pixels, config):
    return colors <= config.palette_threshold and colors * 4 <= pixels


def choose_transforms(channels, num_color, config, progressive=False, lossy=False):
    """Pick a transform chain for ``channels`` (list of Channel, color first)."""
    specs = []
    planes = [c.data for c in channels]
    pixels = planes[0].size
    if not lossy:
        n = count_colors(planes, config.palette_threshold)
        if palette_worthwhile(n, pixels, config):
            specs.append(Palette(0, len(planes), n))
    if not specs and num_color == 3 and not lossy:
        t, _ = choose_rct(planes[:3], config.rct_candidates)
        if t != 0:
            specs.append(Rct(0, t))
    if progressive or lossy:
        specs.append(Squeeze())
    return specs
