"""XYB opponent color space and the sRGB transfer curve.

XYB is computed from linear sRGB-primary values: a 3x3 LMS mix plus a
small bias, a biased cube root, then an opponent map.  The B channel is
always stored as ``B - Y``, so grays have X = B' = 0.
"""

import numpy as np

BIAS = 0.00379307325527544933

MIX = np.array([
    [0.3, 0.622, 0.078],
    [0.23, 0.692, 0.078],
    [0.2434227, 0.2047674, 0.5518099],
])
INV_MIX = np.linalg.inv(MIX)
_CBRT_BIAS = np.cbrt(BIAS)

# default integer scales for the lossy path, in (Y, X, B') order
DEFAULT_XYB_SCALES = (4096, 1024, 4096)


def _finite(a, what):
    a = np.asarray(a, dtype=np.float64)
    if a.shape[-1:] != (3,):
        raise ValueError("%s must have a trailing axis of length 3" % what)
    if not np.all(np.isfinite(a)):
        raise ValueError("%s contains non-finite values" % what)
    return a


def rgb_to_xyb(rgb):
    """Linear RGB (..., 3) to XYB' (..., 3) ordered X, Y, B'."""
    rgb = _finite(rgb, "rgb")
    lms = rgb @ MIX.T + BIAS
    g = np.cbrt(lms) - _CBRT_BIAS
    x = (g[..., 0] - g[..., 1]) / 2
    y = (g[..., 0] + g[..., 1]) / 2
    return np.stack([x, y, g[..., 2] - y], axis=-1)


def xyb_to_rgb(xyb):
    """Inverse of :func:`rgb_to_xyb`."""
    xyb = _finite(xyb, "xyb")
    x, y, bp = xyb[..., 0], xyb[..., 1], xyb[..., 2]
    g = np.stack([y + x, y - x, bp + y], axis=-1) + _CBRT_BIAS
    lms = g * g * g - BIAS
    return lms @ INV_MIX.T


def srgb_to_linear(v):
    """IEC 61966-2-1 decode; input nominally in [0, 1]."""
    v = np.asarray(v, dtype=np.float64)
    a = np.abs(v)
    out = np.where(a <= 0.04045, a / 12.92, ((a + 0.055) / 1.055) ** 2.4)
    return np.copysign(out, v)


def linear_to_srgb(v):
    v = np.asarray(v, dtype=np.float64)
    a = np.abs(v)
    out = np.where(a <= 0.0031308, a * 12.92, 1.055 * a ** (1 / 2.4) - 0.055)
    return np.copysign(out, v)


def samples_to_xyb_ints(planes, bit_depth, scales=DEFAULT_XYB_SCALES):
    """Integer sRGB planes (3, h, w) to rounded, scaled (Y, X, B') planes."""
    maxval = (1 << bit_depth) - 1
    rgb = np.stack([np.asarray(p, dtype=np.float64) / maxval for p in planes], axis=-1)
    xyb = rgb_to_xyb(srgb_to_linear(rgb))
    order = (1, 0, 2)
    return [np.rint(xyb[..., k] * s).astype(np.int64) for k, s in zip(order, scales)]


def xyb_ints_to_samples(planes, bit_depth, scales=DEFAULT_XYB_SCALES):
    """Inverse of :func:`samples_to_xyb_ints`, clamped to the sample range."""
    maxval = (1 << bit_depth) - 1
    y, x, bp = (np.asarray(p, dtype=np.float64) / s for p, s in zip(planes, scales))
    rgb = linear_to_srgb(xyb_to_rgb(np.stack([x, y, bp], axis=-1)))
    out = np.clip(np.rint(rgb * maxval), 0, maxval).astype(np.int64)
    return [out[..., k] for k in range(3)]
