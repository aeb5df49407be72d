"""Exif-style orientation (1-8) applied at decode time."""

import numpy as np


def orient(a, orientation):
    """Turn stored pixels ``a`` (h, w, c) into displayed pixels."""
    if orientation == 1:
        return a
    if orientation == 2:
        return a[:, ::-1]
    if orientation == 3:
        return a[::-1, ::-1]
    if orientation == 4:
        return a[::-1]
    if orientation == 5:
        return a.transpose(1, 0, 2)
    if orientation == 6:
        return np.rot90(a, -1)
    if orientation == 7:
        return a.transpose(1, 0, 2)[::-1, ::-1]
    if orientation == 8:
        return np.rot90(a, 1)
    raise ValueError("orientation must be in [1, 8]")


def stored_point(x, y, orientation, width, height):
    """Stored-image coordinates of displayed pixel (x, y); ``width``/``height`` are stored dims."""
    W, H = width, height
    return {
        1: (x, y),
        2: (W - 1 - x, y),
        3: (W - 1 - x, H - 1 - y),
        4: (x, H - 1 - y),
        5: (y, x),
        6: (y, H - 1 - x),
        7: (W - 1 - y, H - 1 - x),
        8: (W - 1 - y, x),
    }[orientation]


def stored_rect(rect, orientation, width, height):
    """Map a displayed rectangle (x, y, w, h) to stored ``(x0, y0, x1, y1)``."""
    x, y, w, h = rect
    ax, ay = stored_point(x, y, orientation, width, height)
    bx, by = stored_point(x + w - 1, y + h - 1, orientation, width, height)
    return min(ax, bx), min(ay, by), max(ax, bx) + 1, max(ay, by) + 1
