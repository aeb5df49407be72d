"""Palette and delta-palette.

A palette replaces ``k`` channels by one index channel plus an ``n x k``
metachannel listing the colors.  Indices at or beyond ``n`` select one of
189 implicit colors (a 4x4x4 cube followed by a 5x5x5 cube); negative
indices select one of 143 implicit delta entries.  The first ``d`` explicit
entries are deltas too: they are added to a per-component prediction made
from already reconstructed samples.
"""

import itertools

import numpy as np

from ..errors import CorruptStreamError
from ..modular.channel import Channel
from ..modular.predictors import NUM_PREDICTORS, WEIGHTED, neighbors, predict
from ..modular.weighted import WeightedPredictor

MAX_COLORS = 70911
NUM_IMPLICIT_COLORS = 189
NUM_IMPLICIT_DELTAS = 143


def implicit_palette_color(index, bit_depth):
    """Color ``index`` (0-based within the implicit set) as an RGB tuple."""
    if not 0 <= index < NUM_IMPLICIT_COLORS:
        raise ValueError("implicit palette index out of range")
    maxval = (1 << bit_depth) - 1
    if index < 64:
        digits = (index >> 4, (index >> 2) & 3, index & 3)
        # round((2i + 1) * maxval / 8), halves rounded up
        return tuple(((2 * i + 1) * maxval * 2 + 8) // 16 for i in digits)
    index -= 64
    digits = (index // 25, (index // 5) % 5, index % 5)
    return tuple((i * maxval * 2 + 4) // 8 for i in digits)


def _delta_table():
    base = []
    for v in itertools.product(range(-16, 17), repeat=3):
        nz = [c for c in v if c]
        if nz and nz[0] > 0:
            base.append(v)
    base.sort(key=lambda v: (v[0] * v[0] + v[1] * v[1] + v[2] * v[2], v))
    table = [(0, 0, 0)]
    for v in base[:(NUM_IMPLICIT_DELTAS - 1) // 2]:
        table.append(v)
        table.append(tuple(-c for c in v))
    return tuple(table)


IMPLICIT_DELTAS = _delta_table()


def implicit_delta(index):
    """Delta entry for a negative palette index (-1 -> entry 0)."""
    j = -index - 1
    if not 0 <= j < NUM_IMPLICIT_DELTAS:
        raise ValueError("implicit delta index out of range")
    return IMPLICIT_DELTAS[j]


def _component(t, c):
    return t[c] if c < len(t) else 0


def color_table(meta, num_c, bit_depth, extra=0):
    """All absolute colors: explicit rows then implicit ones, shape (n + 189, k)."""
    n = meta.shape[1]
    out = np.zeros((n + NUM_IMPLICIT_COLORS, num_c), dtype=np.int64)
    out[:n] = meta.T
    for i in range(NUM_IMPLICIT_COLORS):
        rgb = implicit_palette_color(i, bit_depth)
        out[n + i] = [_component(rgb, c) for c in range(num_c)]
    return out


def palette_forward(channels, begin_c, num_c, colors=None, num_deltas=0, bit_depth=8,
                    order="luma"):
    """Replace ``num_c`` channels by an index channel; insert the metachannel at 0.

    ``colors`` lists explicit colors (tuples); by default every distinct
    tuple of the image becomes one.  Tuples missing from ``colors`` but
    present in the implicit set use implicit indices.  Only absolute
    entries are produced here (``num_deltas`` entries at the front are
    allowed but never referenced).
    """
    if num_c < 1 or begin_c < 0 or begin_c + num_c > len(channels):
        raise ValueError("palette channel range out of bounds")
    chs = channels[begin_c:begin_c + num_c]
    if len({c.data.shape for c in chs}) != 1:
        raise ValueError("palette channels must share dimensions")
    shape = chs[0].data.shape
    stack = np.stack([c.data.reshape(-1) for c in chs], axis=1)
    uniq, inverse = np.unique(stack, axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)
    if colors is None:
        if order == "luma":
            keys = np.lexsort(tuple(uniq[:, ::-1].T) + (uniq.sum(axis=1),))
            uniq_sorted = uniq[keys]
        else:
            uniq_sorted = uniq
        colors = [tuple(int(v) for v in row) for row in uniq_sorted]
    colors = [tuple(int(v) for v in c) for c in colors]
    if len(colors) > MAX_COLORS:
        raise ValueError("too many palette colors")
    lookup = {}
    for i, col in enumerate(colors):
        if i >= num_deltas:
            lookup.setdefault(col, i)
    n = len(colors)
    for j in range(NUM_IMPLICIT_COLORS):
        rgb = implicit_palette_color(j, bit_depth)
        lookup.setdefault(tuple(_component(rgb, c) for c in range(num_c)), n + j)
    idx_of_uniq = np.empty(len(uniq), dtype=np.int64)
    for u, row in enumerate(uniq):
        key = tuple(int(v) for v in row)
        if key not in lookup:
            raise ValueError("image color missing from palette")
        idx_of_uniq[u] = lookup[key]
    index = Channel(idx_of_uniq[inverse].reshape(shape), chs[0].hshift, chs[0].vshift)
    meta = np.array(colors, dtype=np.int64).reshape(n, num_c).T.copy()
    channels[begin_c:begin_c + num_c] = [index]
    channels.insert(0, Channel(meta.reshape(num_c, n)))
    return colors


class NonLocalPalette(Exception):
    """Raised by :func:`palette_inverse` when ``local_only`` is set and delta entries occur."""


def palette_inverse(channels, begin_c, num_c, num_deltas=0, predictor=0, bit_depth=8,
                    local_only=False):
    """Undo :func:`palette_forward`; ``begin_c`` is the original position.

    Delta entries make a sample depend on its decoded neighbours; with
    ``local_only`` their presence raises :class:`NonLocalPalette` instead.
    """
    meta = channels[0].data
    if meta.shape[0] != num_c:
        raise CorruptStreamError("palette metachannel has the wrong height")
    n = meta.shape[1]
    if num_deltas > n:
        raise CorruptStreamError("more delta entries than palette colors")
    if not 0 <= predictor < NUM_PREDICTORS:
        raise CorruptStreamError("palette predictor out of range")
    pos = begin_c + 1
    if pos >= len(channels):
        raise CorruptStreamError("palette index channel missing")
    index = channels[pos]
    idx = index.data
    if idx.size and (idx.min() < -NUM_IMPLICIT_DELTAS or idx.max() >= n + NUM_IMPLICIT_COLORS):
        raise CorruptStreamError("palette index out of range")
    table = color_table(meta, num_c, bit_depth)
    h, w = idx.shape
    uses_delta = idx.size and (idx.min() < 0 or (num_deltas and idx.min() < num_deltas))
    if not uses_delta:
        planes = [table[idx, c] if idx.size else np.zeros((h, w), np.int64) for c in range(num_c)]
    elif local_only:
        raise NonLocalPalette()
    else:
        planes = _inverse_with_deltas(idx, table, num_deltas, num_c, predictor)
    out = [Channel(p, index.hshift, index.vshift) for p in planes]
    del channels[pos]
    del channels[0]
    channels[begin_c:begin_c] = out


def _inverse_with_deltas(idx, table, d, k, predictor):
    h, w = idx.shape
    rows = [[[0] * w for _ in range(h)] for _ in range(k)]
    ilist = idx.tolist()
    tab = table.tolist()
    wps = [WeightedPredictor(w) for _ in range(k)] if predictor == WEIGHTED else None
    for y in range(h):
        if wps:
            for wp in wps:
                wp.start_row(y)
        for x in range(w):
            i = ilist[y][x]
            if i >= d:
                col = tab[i]
                delta = None
            else:
                delta = tab[i] if i >= 0 else implicit_delta(i)
            for c in range(k):
                ch = rows[c]
                if delta is None:
                    v = col[c]
                    if wps:
                        wps[c].predict(x, *neighbors(ch, x, y)[:5])
                else:
                    nb = neighbors(ch, x, y)
                    wpv = wps[c].predict(x, *nb[:5])[0] if wps else 0
                    v = predict(predictor, *nb, wpv) + _component(delta, c)
                ch[y][x] = v
                if wps:
                    wps[c].update(x, v)
    return [np.array(r, dtype=np.int64).reshape(h, w) for r in rows]
