"""Neighbourhoods and the fourteen fixed predictors.

Missing neighbours are substituted: the very first sample sees zeros;
otherwise W falls back to N, N/NW/WW fall back to W, NE/NN fall back to N
and NEE falls back to NE.  Divisions round towards zero.
"""

import numpy as np

NUM_PREDICTORS = 14
ZERO, WEST, NORTH, AVG_WN, SELECT, GRADIENT, WEIGHTED = range(7)
NORTHEAST, NORTHWEST, WESTWEST, AVG_WNW, AVG_NNW, AVG_NNE, AVG_ALL = range(7, 14)

PREDICTOR_NAMES = (
    "Zero", "West", "North", "AvgW+N", "Select", "Gradient", "Weighted", "NorthEast",
    "NorthWest", "WestWest", "AvgW+NW", "AvgN+NW", "AvgN+NE", "AvgAll",
)

NEIGHBOR_NAMES = ("N", "W", "NW", "NE", "NN", "WW", "NEE")


def neighbors(rows, x, y):
    """Return ``(N, W, NW, NE, NN, WW, NEE)`` for position (x, y).

    ``rows`` is a sequence of rows (each indexable) with row ``y`` filled up
    to ``x - 1``.
    """
    cur = rows[y]
    w = len(cur)
    if y == 0:
        if x == 0:
            return 0, 0, 0, 0, 0, 0, 0
        W = cur[x - 1]
        WW = cur[x - 2] if x > 1 else W
        return W, W, W, W, W, WW, W
    prev = rows[y - 1]
    N = prev[x]
    W = cur[x - 1] if x > 0 else N
    NW = prev[x - 1] if x > 0 else W
    NE = prev[x + 1] if x + 1 < w else N
    NN = rows[y - 2][x] if y > 1 else N
    WW = cur[x - 2] if x > 1 else W
    NEE = prev[x + 2] if x + 2 < w else NE
    return N, W, NW, NE, NN, WW, NEE


def clamped_gradient(N, W, NW):
    g = W + N - NW
    lo, hi = (W, N) if W < N else (N, W)
    return lo if g < lo else hi if g > hi else g


def _half(a):
    return (a + (a < 0)) >> 1


def predict(pid, N, W, NW, NE, NN, WW, NEE, wp_value=0):
    """Scalar predictor; ``wp_value`` is the weighted prediction for id 6."""
    if pid == ZERO:
        return 0
    if pid == WEST:
        return W
    if pid == NORTH:
        return N
    if pid == AVG_WN:
        return _half(W + N)
    if pid == SELECT:
        return W if abs(N - NW) < abs(W - NW) else N
    if pid == GRADIENT:
        return clamped_gradient(N, W, NW)
    if pid == WEIGHTED:
        return wp_value
    if pid == NORTHEAST:
        return NE
    if pid == NORTHWEST:
        return NW
    if pid == WESTWEST:
        return WW
    if pid == AVG_WNW:
        return _half(W + NW)
    if pid == AVG_NNW:
        return _half(N + NW)
    if pid == AVG_NNE:
        return _half(N + NE)
    if pid == AVG_ALL:
        a = 6 * N - 2 * NN + 7 * W + WW + NEE + 3 * NE + 8
        return (a + (15 if a < 0 else 0)) >> 4
    raise ValueError(f"unknown predictor {pid}")


# Inline Python expressions used by the generated decode loops.
PREDICTOR_EXPR = {
    ZERO: "0",
    WEST: "W",
    NORTH: "N",
    AVG_WN: "((W + N + (W + N < 0)) >> 1)",
    SELECT: "(W if abs(N - NW) < abs(W - NW) else N)",
    GRADIENT: "_grad(N, W, NW)",
    WEIGHTED: "wp_pred",
    NORTHEAST: "NE",
    NORTHWEST: "NW",
    WESTWEST: "WW",
    AVG_WNW: "((W + NW + (W + NW < 0)) >> 1)",
    AVG_NNW: "((N + NW + (N + NW < 0)) >> 1)",
    AVG_NNE: "((N + NE + (N + NE < 0)) >> 1)",
    AVG_ALL: "_avgall(N, W, NE, NN, WW, NEE)",
}

PREDICTOR_NEEDS = {
    ZERO: (), WEST: ("W",), NORTH: ("N",), AVG_WN: ("W", "N"), SELECT: ("N", "W", "NW"),
    GRADIENT: ("N", "W", "NW"), WEIGHTED: ("N", "W", "NW", "NE", "NN"), NORTHEAST: ("NE",),
    NORTHWEST: ("NW",), WESTWEST: ("WW",), AVG_WNW: ("W", "NW"), AVG_NNW: ("N", "NW"),
    AVG_NNE: ("N", "NE"), AVG_ALL: ("N", "W", "NE", "NN", "WW", "NEE"),
}


def _avgall(N, W, NE, NN, WW, NEE):
    a = 6 * N - 2 * NN + 7 * W + WW + NEE + 3 * NE + 8
    return (a + (15 if a < 0 else 0)) >> 4


# ---- vectorized forms (encoder side) --------------------------------------


def neighbor_arrays(a):
    """All seven neighbour planes of a 2D int64 array, with substitutions."""
    a = np.asarray(a, dtype=np.int64)
    W = np.zeros_like(a)
    W[:, 1:] = a[:, :-1]
    N = np.zeros_like(a)
    N[1:] = a[:-1]
    N[0] = W[0]
    W[1:, 0] = N[1:, 0]
    NW = W.copy()
    NW[1:, 1:] = a[:-1, :-1]
    NE = N.copy()
    NE[1:, :-1] = a[:-1, 1:]
    NN = N.copy()
    NN[2:] = a[:-2]
    WW = W.copy()
    WW[:, 2:] = a[:, :-2]
    NEE = NE.copy()
    NEE[1:, :-2] = a[:-1, 2:]
    return {"N": N, "W": W, "NW": NW, "NE": NE, "NN": NN, "WW": WW, "NEE": NEE}


def _half_arr(a):
    return (a + (a < 0)) >> 1


def clamped_gradient_array(N, W, NW):
    lo = np.minimum(W, N)
    hi = np.maximum(W, N)
    return np.clip(W + N - NW, lo, hi)


def predict_array(pid, nb, wp=None):
    N, W, NW, NE = nb["N"], nb["W"], nb["NW"], nb["NE"]
    if pid == ZERO:
        return np.zeros_like(N)
    if pid == WEST:
        return W
    if pid == NORTH:
        return N
    if pid == AVG_WN:
        return _half_arr(W + N)
    if pid == SELECT:
        return np.where(np.abs(N - NW) < np.abs(W - NW), W, N)
    if pid == GRADIENT:
        return clamped_gradient_array(N, W, NW)
    if pid == WEIGHTED:
        if wp is None:
            raise ValueError("weighted predictor requires its prediction plane")
        return wp
    if pid == NORTHEAST:
        return NE
    if pid == NORTHWEST:
        return NW
    if pid == WESTWEST:
        return nb["WW"]
    if pid == AVG_WNW:
        return _half_arr(W + NW)
    if pid == AVG_NNW:
        return _half_arr(N + NW)
    if pid == AVG_NNE:
        return _half_arr(N + NE)
    if pid == AVG_ALL:
        a = 6 * N - 2 * nb["NN"] + 7 * W + nb["WW"] + nb["NEE"] + 3 * NE + 8
        return (a + np.where(a < 0, 15, 0)) >> 4
    raise ValueError(f"unknown predictor {pid}")
