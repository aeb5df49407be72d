"""The Squeeze transform: a reversible, Haar-like halving step.

Each step turns a channel into a half-size average channel and a residual
channel.  Residuals store ``A - B`` minus a tendency term, a clamped
interpolation that is zero at local extrema, so zeroed residuals never
overshoot their neighbourhood.
"""

from typing import NamedTuple

import numpy as np

from ..errors import CorruptStreamError
from ..modular.channel import Channel

MAX_FIRST_PREVIEW = 8


class SqueezeStep(NamedTuple):
    horizontal: bool
    in_place: bool
    begin_c: int
    num_c: int


def squeeze_avg(a, b):
    """Average rounded towards ``a`` (up when a > b, down otherwise)."""
    return (a + b + (a > b)) >> 1


def _div12(x):
    # round half away from zero
    return (x + 6) // 12 if x >= 0 else -((-x + 6) // 12)


def tendency(a, b, c):
    """Tendency term from the previous sample ``a``, average ``b`` and next average ``c``."""
    if a >= b >= c:
        t = _div12(4 * a - 3 * c - b)
        if t - (t & 1) > 2 * (a - b):
            t = 2 * (a - b) + 1
        if t + (t & 1) > 2 * (b - c):
            t = 2 * (b - c)
        return t
    if a <= b <= c:
        t = _div12(4 * a - 3 * c - b)
        if t + (t & 1) < 2 * (a - b):
            t = 2 * (a - b) - 1
        if t - (t & 1) < 2 * (b - c):
            t = 2 * (b - c)
        return t
    return 0


def tendency_array(a, b, c):
    """Vectorized :func:`tendency`."""
    a, b, c = (np.asarray(v, dtype=np.int64) for v in (a, b, c))
    x = 4 * a - 3 * c - b
    t = np.where(x >= 0, (x + 6) // 12, -((6 - x) // 12))
    dec = (a >= b) & (b >= c)
    inc = (a <= b) & (b <= c)
    odd = t & 1
    td = np.where(t - odd > 2 * (a - b), 2 * (a - b) + 1, t)
    td = np.where(td + (td & 1) > 2 * (b - c), 2 * (b - c), td)
    ti = np.where(t + odd < 2 * (a - b), 2 * (a - b) - 1, t)
    ti = np.where(ti - (ti & 1) < 2 * (b - c), 2 * (b - c), ti)
    return np.where(dec, td, np.where(inc, ti, 0))


def unsqueeze_pair(avg, diff):
    """Recover ``(A, B)`` from their rounded average and difference."""
    half = diff >> 1 if diff >= 0 else -((-diff) >> 1)
    a = avg + half
    return a, a - diff


def unsqueeze_pairs(prev, avg, nxt, res):
    """Vectorized inverse step: ``(A, B)`` from the previous sample, the average,
    the next average and the stored residual."""
    diff = np.asarray(res, dtype=np.int64) + tendency_array(prev, avg, nxt)
    half_d = np.where(diff >= 0, diff >> 1, -((-diff) >> 1))
    A = np.asarray(avg, dtype=np.int64) + half_d
    return A, A - diff


def _forward_rows(x):
    """Horizontal squeeze of every row of ``x`` (shape h x w)."""
    h, w = x.shape
    half = w // 2
    A = x[:, 0:2 * half:2]
    B = x[:, 1:2 * half:2]
    avg = (A + B + (A > B)) >> 1
    down = np.empty((h, (w + 1) // 2), dtype=np.int64)
    down[:, :half] = avg
    if w & 1:
        down[:, half] = x[:, w - 1]
    if half == 0:
        return down, np.zeros((h, 0), dtype=np.int64)
    prev = np.empty_like(avg)
    prev[:, 0] = avg[:, 0]
    prev[:, 1:] = B[:, :-1]
    nxt = np.empty_like(avg)
    nxt[:, :-1] = down[:, 1:half]
    nxt[:, -1] = down[:, half] if w & 1 else avg[:, -1]
    res = (A - B) - tendency_array(prev, avg, nxt)
    return down, res


def _inverse_rows(down, res, w):
    h = down.shape[0]
    half = w // 2
    if down.shape[1] != (w + 1) // 2 or res.shape != (h, half):
        raise CorruptStreamError("squeeze channel dimensions mismatch")
    out = np.empty((h, w), dtype=np.int64)
    if w & 1:
        out[:, w - 1] = down[:, half]
    prev_b = None
    for i in range(half):
        avg = down[:, i]
        nxt = down[:, i + 1] if i + 1 < down.shape[1] else avg
        a = avg if prev_b is None else prev_b
        A, B = unsqueeze_pairs(a, avg, nxt, res[:, i])
        out[:, 2 * i] = A
        out[:, 2 * i + 1] = B
        prev_b = B
    return out


def squeeze_forward(ch, horizontal):
    """Split one channel into ``(down, residual)`` channels."""
    x = ch.data
    if horizontal:
        down, res = _forward_rows(x)
        hs, vs = ch.hshift + 1, ch.vshift
    else:
        down, res = _forward_rows(x.T)
        down, res = down.T, res.T
        hs, vs = ch.hshift, ch.vshift + 1
    return (Channel(np.ascontiguousarray(down), hs, vs),
            Channel(np.ascontiguousarray(res), hs, vs))


def squeeze_inverse(down, res, horizontal, size):
    """Rebuild the channel of length ``size`` along the squeezed axis."""
    if horizontal:
        out = _inverse_rows(down.data, res.data, size)
        return Channel(out, down.hshift - 1, down.vshift)
    out = _inverse_rows(down.data.T, res.data.T, size).T
    return Channel(np.ascontiguousarray(out), down.hshift, down.vshift - 1)


def default_squeeze_steps(width, height, begin_c, num_c):
    """Alternate halvings, larger dimension first, until both sides are <= 8."""
    steps = []
    w, h = width, height
    while w > MAX_FIRST_PREVIEW or h > MAX_FIRST_PREVIEW:
        horizontal = h <= MAX_FIRST_PREVIEW or (w > MAX_FIRST_PREVIEW and w >= h)
        steps.append(SqueezeStep(horizontal, True, begin_c, num_c))
        if horizontal:
            w = (w + 1) // 2
        else:
            h = (h + 1) // 2
    return steps


def apply_step(channels, step):
    """Forward step; returns the pre-step sizes needed to undo it."""
    b, n = step.begin_c, step.num_c
    if b < 0 or n < 1 or b + n > len(channels):
        raise ValueError("squeeze step channel range out of bounds")
    sizes = []
    residuals = []
    for k in range(b, b + n):
        ch = channels[k]
        sizes.append(ch.width if step.horizontal else ch.height)
        down, res = squeeze_forward(ch, step.horizontal)
        channels[k] = down
        residuals.append(res)
    if step.in_place:
        channels[b + n:b + n] = residuals
    else:
        channels.extend(residuals)
    return sizes


def undo_step(channels, step, sizes):
    b, n = step.begin_c, step.num_c
    if step.in_place:
        rpos = b + n
    else:
        rpos = len(channels) - n
    if b < 0 or n < 1 or rpos < b + n or rpos + n > len(channels):
        raise CorruptStreamError("squeeze step channel range out of bounds")
    residuals = channels[rpos:rpos + n]
    del channels[rpos:rpos + n]
    for k, res, size in zip(range(b, b + n), residuals, sizes):
        channels[k] = squeeze_inverse(channels[k], res, step.horizontal, size)
