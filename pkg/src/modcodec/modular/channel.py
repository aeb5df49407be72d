"""Coding one channel against an MA tree.

Samples are 32-bit signed integers and residual arithmetic wraps modulo
2^32, so every residual packs into an unsigned 32-bit value whatever the
predictor does.  The encoder works on whole planes with numpy.  The decoder
compiles each tree into a specialised Python loop that only computes the
neighbours and properties the tree actually uses; very deep trees, which
would exceed the compiler's nesting limit, go through a generic interpreter
instead.
"""

import numpy as np

from ..entropy.hybrid import pack_signed, pack_signed_array, unpack_signed
from .predictors import (
    PREDICTOR_EXPR,
    PREDICTOR_NEEDS,
    WEIGHTED,
    _avgall,
    clamped_gradient,
    neighbor_arrays,
    neighbors,
    predict,
    predict_array,
)
from .properties import PrevChannel, PropertyPlanes, scalar_properties
from .tree import MAX_PREV_CHANNELS, NUM_STATIC_PROPERTIES, Decision
from .weighted import DEFAULT_WP, WeightedPredictor, wp_planes

INT32_MIN = -(1 << 31)
INT32_MAX = (1 << 31) - 1
MAX_COMPILED_DEPTH = 60


class Channel:
    """A 2D grid of samples plus its subsampling shifts."""

    __slots__ = ("data", "hshift", "vshift")

    def __init__(self, data, hshift=0, vshift=0):
        self.data = np.asarray(data, dtype=np.int64)
        if self.data.ndim != 2:
            raise ValueError("channel data must be 2D")
        self.hshift = hshift
        self.vshift = vshift

    @property
    def width(self):
        return self.data.shape[1]

    @property
    def height(self):
        return self.data.shape[0]

    @property
    def size(self):
        return self.data.size

    def copy(self, data=None):
        return Channel(self.data.copy() if data is None else data, self.hshift, self.vshift)

    def __repr__(self):
        return "Channel(%dx%d, shift=%d,%d)" % (self.width, self.height, self.hshift, self.vshift)


def wrap32(v):
    return ((v - INT32_MIN) & 0xFFFFFFFF) + INT32_MIN


def wrap32_array(a):
    return ((a - INT32_MIN) & 0xFFFFFFFF) + INT32_MIN


def _prev_list(prev):
    return [p if isinstance(p, PrevChannel) else PrevChannel(p) for p in prev][:MAX_PREV_CHANNELS]


# ---- encoder ---------------------------------------------------------------

def compute_wp_arrays(a, wp_params=DEFAULT_WP):
    """Weighted predictions and max-error planes of a known channel."""
    wpp, wpe = wp_planes(a, wp_params)
    return (np.array(wpp, dtype=np.int64).reshape(a.shape),
            np.array(wpe, dtype=np.int64).reshape(a.shape))


def encode_channel(a, tree, channel_index=0, stream_index=0, prev=(), wp_params=DEFAULT_WP,
                   nb=None, wp_arrays=None):
    """Residual tokens for channel ``a``.

    Returns ``(contexts, packed_residuals, reconstruction)`` as flat / 2D
    int64 arrays.  The reconstruction differs from ``a`` only when some leaf
    has a multiplier that does not divide its residuals (lossy coding).
    ``nb`` and ``wp_arrays`` (see :func:`compute_wp_arrays`) may be passed in when
    already computed.
    """
    a = np.asarray(a, dtype=np.int64)
    if a.min(initial=0) < INT32_MIN or a.max(initial=0) > INT32_MAX:
        raise ValueError("channel samples must fit in 32 bits")
    prev = _prev_list(prev)
    if nb is None:
        nb = neighbor_arrays(a)
    wp = maxerr = None
    if tree.needs_wp():
        wp, maxerr = wp_arrays if wp_arrays is not None else compute_wp_arrays(a, wp_params)
    planes = PropertyPlanes(a, channel_index, stream_index, prev, maxerr, nb)
    leaf_idx = tree.leaf_index_array(planes, a.shape)

    pred = np.zeros_like(a)
    cache = {}
    for leaf in tree.leaves:
        mask = leaf_idx == leaf.context
        if not mask.any():
            continue
        plane = cache.get(leaf.predictor)
        if plane is None:
            plane = cache[leaf.predictor] = predict_array(leaf.predictor, nb, wp)
        pred[mask] = plane[mask]
    mult = np.array([leaf.multiplier for leaf in tree.leaves], dtype=np.int64)[leaf_idx]
    off = np.array([leaf.offset for leaf in tree.leaves], dtype=np.int64)[leaf_idx]
    diff = wrap32_array(a - pred - off)
    if (mult == 1).all():
        res = diff
    else:
        if (diff % mult != 0).any():
            return _encode_channel_scalar(a, tree, channel_index, stream_index, prev, wp_params)
        res = diff // mult
    return leaf_idx.reshape(-1), pack_signed_array(res.reshape(-1)), a


def _encode_channel_scalar(a, tree, ci, si, prev, wp_params):
    """Sequential encoder for leaves whose multiplier quantizes residuals."""
    h, w = a.shape
    src = a.tolist()
    rows = [[0] * w for _ in range(h)]
    pv = [(p.values.tolist(), p.err.tolist()) for p in prev]
    wp = WeightedPredictor(w, wp_params) if tree.needs_wp() else None
    ctxs, vals = [], []
    for y in range(h):
        if wp:
            wp.start_row(y)
        prev9 = 0
        for x in range(w):
            N, W, NW, NE, NN, WW, NEE = neighbors(rows, x, y)
            wpv = me = 0
            if wp:
                wpv, me = wp.predict(x, N, W, NW, NE, NN)
            props = scalar_properties(ci, si, x, y, N, W, NW, NE, NN, WW, prev9, me,
                                      [(v[y][x], e[y][x]) for v, e in pv])
            leaf = tree.lookup(props)
            p = predict(leaf.predictor, N, W, NW, NE, NN, WW, NEE, wpv)
            d = src[y][x] - p - leaf.offset
            if leaf.multiplier == 1:
                r = wrap32(d)
            else:
                r = abs(d) // leaf.multiplier
                r = -r if d < 0 else r
            v = wrap32(p + r * leaf.multiplier + leaf.offset)
            rows[y][x] = v
            if wp:
                wp.update(x, v)
            prev9 = W + N - NW
            ctxs.append(leaf.context)
            vals.append(pack_signed(r))
    return (np.array(ctxs, dtype=np.int64), np.array(vals, dtype=np.int64),
            np.array(rows, dtype=np.int64).reshape(h, w))


# ---- decoder ---------------------------------------------------------------

def decode_channel(reader, tree, width, height, channel_index=0, stream_index=0, prev=(),
                   wp_params=DEFAULT_WP, force_interpreter=False):
    """Decode a ``height`` x ``width`` channel; returns a 2D int64 array."""
    prev = _prev_list(prev)
    if force_interpreter or tree.depth() > MAX_COMPILED_DEPTH:
        rows = _decode_interpreted(reader.read, tree, width, height, channel_index,
                                   stream_index, prev, wp_params)
    else:
        fn, used_prev = _compiled(tree)
        pv = [prev[k].values.tolist() if k < len(prev) else None for k in range(used_prev)]
        pe = [prev[k].err.tolist() if k < len(prev) else None for k in range(used_prev)]
        wp = WeightedPredictor(width, wp_params) if tree.needs_wp() else None
        rows = fn(reader.read, width, height, channel_index, stream_index, pv, pe, wp)
    return np.array(rows, dtype=np.int64).reshape(height, width)


def _decode_interpreted(read, tree, w, h, ci, si, prev, wp_params):
    rows = []
    pv = [(p.values.tolist(), p.err.tolist()) for p in prev]
    wp = WeightedPredictor(w, wp_params) if tree.needs_wp() else None
    for y in range(h):
        cur = [0] * w
        rows.append(cur)
        if wp:
            wp.start_row(y)
        prev9 = 0
        for x in range(w):
            N, W, NW, NE, NN, WW, NEE = neighbors(rows, x, y)
            wpv = me = 0
            if wp:
                wpv, me = wp.predict(x, N, W, NW, NE, NN)
            props = scalar_properties(ci, si, x, y, N, W, NW, NE, NN, WW, prev9, me,
                                      [(v[y][x], e[y][x]) for v, e in pv])
            leaf = tree.lookup(props)
            p = predict(leaf.predictor, N, W, NW, NE, NN, WW, NEE, wpv)
            v = wrap32(p + unpack_signed(read(leaf.context)) * leaf.multiplier + leaf.offset)
            cur[x] = v
            if wp:
                wp.update(x, v)
            prev9 = W + N - NW
    return rows


_PROP_EXPR = {
    0: "ci", 1: "si", 2: "y", 3: "x", 4: "abs(N)", 5: "abs(W)", 6: "N", 7: "W",
    8: "(W - p9prev)", 9: "(W + N - NW)", 10: "(W - NW)", 11: "(NW - N)",
    12: "(N - NE)", 13: "(N - NN)", 14: "(W - WW)", 15: "max_err",
}
_PROP_NEEDS = {
    4: ("N",), 5: ("W",), 6: ("N",), 7: ("W",), 8: ("W", "N", "NW"), 9: ("W", "N", "NW"),
    10: ("W", "NW"), 11: ("NW", "N"), 12: ("N", "NE"), 13: ("N", "NN"), 14: ("W", "WW"),
}
_NEIGHBOR_DEPS = {"N": (), "W": ("N",), "NW": ("W",), "NE": ("N",), "NN": ("N",),
                  "WW": ("W",), "NEE": ("NE",)}
_ORDER = ("N", "W", "NW", "NE", "NN", "WW", "NEE")

_GEN_ROW = {
    "N": "N = prev[x]",
    "W": "W = cur[x - 1] if x else N",
    "NW": "NW = prev[x - 1] if x else W",
    "NE": "NE = prev[x + 1] if x < wm1 else N",
    "NN": "NN = pprev[x]",
    "WW": "WW = cur[x - 2] if x > 1 else W",
    "NEE": "NEE = prev[x + 2] if x < wm2 else NE",
}

_cache = {}


def _prop_expr(p):
    if p < NUM_STATIC_PROPERTIES:
        return _PROP_EXPR[p]
    k, r = divmod(p - NUM_STATIC_PROPERTIES, 4)
    name = ("pv%d" if r < 2 else "pe%d") % k
    return ("abs(%s[x])" if r % 2 == 0 else "%s[x]") % name


def _tree_key(tree):
    out = []
    for n in tree.bfs():
        if isinstance(n, Decision):
            out.append((n.prop, n.threshold))
        else:
            out.append((n.predictor, n.multiplier, n.offset, n.context))
    return tuple(out)


def _compiled(tree):
    key = _tree_key(tree)
    got = _cache.get(key)
    if got is None:
        got = _cache[key] = _compile(tree)
        if len(_cache) > 512:
            _cache.pop(next(iter(_cache)))
    return got


def _compile(tree):
    props = tree.used_properties()
    preds = tree.used_predictors()
    use_wp = tree.needs_wp()
    need_p8 = 8 in props
    need = set()
    for p in props:
        need.update(_PROP_NEEDS.get(p, ()))
    for pid in preds:
        need.update(PREDICTOR_NEEDS[pid])
    if use_wp:
        need.update(PREDICTOR_NEEDS[WEIGHTED])
    changed = True
    while changed:
        changed = False
        for n in list(need):
            for d in _NEIGHBOR_DEPS[n]:
                if d not in need:
                    need.add(d)
                    changed = True
    if need:
        # the first row derives every neighbour from W
        need.add("W")
    need = [n for n in _ORDER if n in need]
    used_prev = 0
    for p in props:
        if p >= NUM_STATIC_PROPERTIES:
            used_prev = max(used_prev, (p - NUM_STATIC_PROPERTIES) // 4 + 1)

    body = []

    def emit(node, ind):
        pad = "    " * ind
        if isinstance(node, Decision):
            body.append("%sif %s > %d:" % (pad, _prop_expr(node.prop), node.threshold))
            emit(node.left, ind + 1)
            body.append("%selse:" % pad)
            emit(node.right, ind + 1)
            return
        pred = PREDICTOR_EXPR[node.predictor]
        body.append("%su = read(%d)" % (pad, node.context))
        res = "((u >> 1) ^ -(u & 1))"
        if node.multiplier != 1:
            res = "%s * %d" % (res, node.multiplier)
        if node.offset:
            res = "%s + %d" % (res, node.offset)
        body.append("%sv = %s + %s" % (pad, pred, res))

    emit(tree.root, 0)

    def loop(first_row):
        out = ["        for x in range(w):"]
        ind = "            "
        if first_row:
            if need:
                out.append(ind + "if x:")
                if "W" in need:
                    out.append(ind + "    W = cur[x - 1]")
                for n in need:
                    if n == "WW":
                        out.append(ind + "    WW = cur[x - 2] if x > 1 else W")
                    elif n != "W":
                        out.append(ind + "    %s = W" % n)
                out.append(ind + "else:")
                out.append(ind + "    " + " = ".join(need) + " = 0")
        else:
            for n in need:
                out.append(ind + _GEN_ROW[n])
        if use_wp:
            out.append(ind + "wp_pred, max_err = wp_predict(x, N, W, NW, NE, NN)")
        out += [ind + line for line in body]
        out.append(ind + "if v > 2147483647 or v < -2147483648:")
        out.append(ind + "    v = ((v + 2147483648) & 0xFFFFFFFF) - 2147483648")
        out.append(ind + "cur[x] = v")
        if use_wp:
            out.append(ind + "wp_update(x, v)")
        if need_p8:
            out.append(ind + "p9prev = W + N - NW")
        return out

    src = ["def _decode(read, w, h, ci, si, pvs, pes, wp):",
           "    rows = []",
           "    wm1 = w - 1",
           "    wm2 = w - 2",
           "    prev = pprev = None"]
    if use_wp:
        src += ["    wp_predict = wp.predict", "    wp_update = wp.update"]
    src += ["    for y in range(h):",
            "        cur = [0] * w"]
    if use_wp:
        src.append("        wp.start_row(y)")
    if need_p8:
        src.append("        p9prev = 0")
    for k in range(used_prev):
        src.append("        pv%d = pvs[%d][y] if pvs[%d] is not None else zero_row(w)" % (k, k, k))
        src.append("        pe%d = pes[%d][y] if pes[%d] is not None else zero_row(w)" % (k, k, k))
    src.append("        if y == 0:")
    src += ["    " + s for s in loop(True)]
    src.append("        else:")
    src.append("            pprev = rows[y - 2] if y > 1 else prev")
    src += ["    " + s for s in loop(False)]
    src += ["        rows.append(cur)",
            "        prev = cur",
            "    return rows"]
    code = "\n".join(src)
    env = {"_grad": clamped_gradient, "_avgall": _avgall, "zero_row": _zero_row}
    exec(compile(code, "<ma-tree>", "exec"), env)
    fn = env["_decode"]
    fn.source = code
    return fn, used_prev


def _zero_row(w):
    return [0] * w
