"""Property planes for MA-tree decisions (encoder side, vectorized).

Properties 0..15 are local; every previously coded channel of the same size
adds four more: ``|v|``, ``v``, ``|err|`` and ``err`` where ``err`` is that
channel's miss against the clamped gradient predictor.  Up to 16 such
channels are visible, most recent first; missing ones read as zero.
"""

import numpy as np

from .predictors import clamped_gradient_array, neighbor_arrays
from .tree import MAX_PREV_CHANNELS, NUM_STATIC_PROPERTIES

PROPERTY_NAMES = (
    "channel", "stream", "y", "x", "|N|", "|W|", "N", "W", "W-prev9", "W+N-NW",
    "W-NW", "NW-N", "N-NE", "N-NN", "W-WW", "max_error",
)


def property_name(p):
    if p < NUM_STATIC_PROPERTIES:
        return PROPERTY_NAMES[p]
    k, r = divmod(p - NUM_STATIC_PROPERTIES, 4)
    base = "Prev%d" % (k + 1)
    return ("|%s|" % base, base, "|%sErr|" % base, base + "Err")[r]


def gradient_error(a):
    """Prediction miss of the clamped gradient predictor over a whole channel."""
    nb = neighbor_arrays(a)
    return np.asarray(a, dtype=np.int64) - clamped_gradient_array(nb["N"], nb["W"], nb["NW"])


class PrevChannel:
    """An already coded channel as seen by later channels of the same size."""

    __slots__ = ("values", "err")

    def __init__(self, values):
        self.values = np.asarray(values, dtype=np.int64)
        self.err = gradient_error(self.values)


class PropertyPlanes:
    """Lazily computed property planes of one channel.

    ``planes(p)`` returns a 2D int64 array; ``max_error`` must be supplied
    when property 15 is requested.
    """

    def __init__(self, a, channel_index=0, stream_index=0, prev=(), max_error=None, nb=None):
        self.a = np.asarray(a, dtype=np.int64)
        self.nb = nb if nb is not None else neighbor_arrays(self.a)
        self.ci = channel_index
        self.si = stream_index
        self.prev = list(prev)[:MAX_PREV_CHANNELS]
        self.max_error = max_error
        self._cache = {}

    def __call__(self, p):
        got = self._cache.get(p)
        if got is None:
            got = self._compute(p)
            self._cache[p] = got
        return got

    def _compute(self, p):
        a = self.a
        nb = self.nb
        h, w = a.shape
        N, W, NW = nb["N"], nb["W"], nb["NW"]
        if p == 0:
            return np.full(a.shape, self.ci, dtype=np.int64)
        if p == 1:
            return np.full(a.shape, self.si, dtype=np.int64)
        if p == 2:
            return np.repeat(np.arange(h, dtype=np.int64)[:, None], w, axis=1)
        if p == 3:
            return np.repeat(np.arange(w, dtype=np.int64)[None, :], h, axis=0)
        if p == 4:
            return np.abs(N)
        if p == 5:
            return np.abs(W)
        if p == 6:
            return N
        if p == 7:
            return W
        if p == 8:
            prev9 = np.zeros_like(a)
            prev9[:, 1:] = self(9)[:, :-1]
            return W - prev9
        if p == 9:
            return W + N - NW
        if p == 10:
            return W - NW
        if p == 11:
            return NW - N
        if p == 12:
            return N - nb["NE"]
        if p == 13:
            return N - nb["NN"]
        if p == 14:
            return W - nb["WW"]
        if p == 15:
            if self.max_error is None:
                raise ValueError("max_error plane not supplied")
            return np.asarray(self.max_error, dtype=np.int64)
        k, r = divmod(p - NUM_STATIC_PROPERTIES, 4)
        if k >= len(self.prev):
            return np.zeros(a.shape, dtype=np.int64)
        pc = self.prev[k]
        src = pc.values if r < 2 else pc.err
        return np.abs(src) if r % 2 == 0 else src

    def num_properties(self):
        return NUM_STATIC_PROPERTIES + 4 * len(self.prev)


def scalar_properties(i, stream, x, y, N, W, NW, NE, NN, WW, prev9, max_error, prev_vals):
    """The full property vector at one position (reference implementation).

    ``prev_vals`` is a list of ``(value, err)`` pairs, most recent channel
    first.
    """
    props = [i, stream, y, x, abs(N), abs(W), N, W, W - prev9, W + N - NW,
             W - NW, NW - N, N - NE, N - NN, W - WW, max_error]
    for v, e in prev_vals[:MAX_PREV_CHANNELS]:
        props += [abs(v), v, abs(e), e]
    props += [0] * (4 * (MAX_PREV_CHANNELS - min(len(prev_vals), MAX_PREV_CHANNELS)))
    return props
