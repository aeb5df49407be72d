"""Reversible color transforms: 6 permutations times 7 integer lifts."""

import numpy as np

NUM_RCT = 42
YCOCG = 6

# output slot k takes input channel PERMUTATIONS[p][k]
PERMUTATIONS = ((0, 1, 2), (1, 2, 0), (2, 0, 1), (0, 2, 1), (1, 0, 2), (2, 1, 0))


def _check(rct_type):
    if not 0 <= rct_type < NUM_RCT:
        raise ValueError("rct_type must be in [0, 41]")


def forward_triple(r, g, b, rct_type):
    """Apply one RCT to a single triple (also works elementwise on arrays)."""
    _check(rct_type)
    src = (r, g, b)
    perm = PERMUTATIONS[rct_type // 7]
    a, b, c = (src[i] for i in perm)
    kind = rct_type % 7
    if kind == 6:
        co = a - c
        t = c + (co >> 1)
        cg = b - t
        return t + (cg >> 1), co, cg
    y, z = b, c
    if kind in (1, 3, 5):
        z = c - a
    if kind in (2, 3):
        y = b - a
    elif kind in (4, 5):
        y = b - ((a + c) >> 1)
    return a, y, z


def inverse_triple(x, y, z, rct_type):
    _check(rct_type)
    kind = rct_type % 7
    if kind == 6:
        t = x - (z >> 1)
        b = z + t
        c = t - (y >> 1)
        a = c + y
    else:
        a, b, c = x, y, z
        if kind in (1, 3, 5):
            c = c + a
        if kind in (2, 3):
            b = b + a
        elif kind in (4, 5):
            b = b + ((a + c) >> 1)
    out = [None] * 3
    for slot, i in enumerate(PERMUTATIONS[rct_type // 7]):
        out[i] = (a, b, c)[slot]
    return tuple(out)


def _planes(channels, begin_c):
    if begin_c < 0 or begin_c + 3 > len(channels):
        raise ValueError("RCT needs three channels starting at begin_c")
    chs = channels[begin_c:begin_c + 3]
    if len({c.data.shape for c in chs}) != 1:
        raise ValueError("RCT channels must share dimensions")
    return chs


def rct_forward(channels, begin_c, rct_type):
    chs = _planes(channels, begin_c)
    out = forward_triple(*(c.data for c in chs), rct_type)
    for c, d in zip(chs, out):
        c.data = np.asarray(d, dtype=np.int64)


def rct_inverse(channels, begin_c, rct_type):
    chs = _planes(channels, begin_c)
    out = inverse_triple(*(c.data for c in chs), rct_type)
    for c, d in zip(chs, out):
        c.data = np.asarray(d, dtype=np.int64)
