"""Hybrid integer split/merge and signed packing.

A value is split into an entropy-coded *token* and a run of raw bits.  The
token carries the exponent plus ``msb_in_token`` bits just below the leading
one and the ``lsb_in_token`` lowest bits; what is left in the middle is raw.
"""

from typing import NamedTuple

import numpy as np


class HybridUintConfig(NamedTuple):
    split_exponent: int
    msb_in_token: int
    lsb_in_token: int

    def validate(self):
        s, m, l = self
        if not (0 <= s <= 15 and m >= 0 and l >= 0 and m + l <= s):
            raise ValueError(f"invalid hybrid uint config {tuple(self)}")
        return self

    def max_token(self, max_value=(1 << 32) - 1):
        return split_token(max_value, self)[0]


DEFAULT_CONFIG = HybridUintConfig(4, 1, 0)


def pack_signed(k):
    return 2 * k if k >= 0 else -2 * k - 1


def unpack_signed(u):
    return -((u + 1) >> 1) if u & 1 else u >> 1


def pack_signed_array(a):
    a = np.asarray(a, dtype=np.int64)
    return np.where(a >= 0, 2 * a, -2 * a - 1)


def unpack_signed_array(u):
    u = np.asarray(u, dtype=np.int64)
    return np.where(u & 1, -((u + 1) >> 1), u >> 1)


def split_token(value, cfg):
    """Return ``(token, nbits, raw)`` for an unsigned ``value``."""
    split, msb, lsb = cfg
    if value < (1 << split):
        return value, 0, 0
    p = value.bit_length() - 1
    nbits = p - msb - lsb
    token = ((1 << split) + ((p - split) << (msb + lsb))
             + (((value >> (p - msb)) & ((1 << msb) - 1)) << lsb)
             + (value & ((1 << lsb) - 1)))
    return token, nbits, (value >> lsb) & ((1 << nbits) - 1)


def token_raw_bits(token, cfg):
    """Number of raw bits that follow ``token``."""
    split, msb, lsb = cfg
    if token < (1 << split):
        return 0
    return split - msb - lsb + ((token - (1 << split)) >> (msb + lsb))


def merge_token(token, raw, cfg):
    """Inverse of :func:`split_token` given the raw bits that followed."""
    split, msb, lsb = cfg
    if token < (1 << split):
        return token
    t = token - (1 << split)
    nbits = split - msb - lsb + (t >> (msb + lsb))
    low = t & ((1 << lsb) - 1)
    top = ((t >> lsb) & ((1 << msb) - 1)) | (1 << msb)
    return (((top << nbits) | raw) << lsb) | low


def split_tokens_array(values, cfg):
    """Vectorized :func:`split_token`; returns ``(tokens, nbits, raw)`` arrays."""
    v = np.asarray(values, dtype=np.int64)
    split, msb, lsb = cfg
    small = v < (1 << split)
    vv = np.maximum(v, 1)
    # bit_length - 1 without float rounding issues
    p = np.zeros(v.shape, dtype=np.int64)
    tmp = vv.copy()
    for shift in (32, 16, 8, 4, 2, 1):
        big = tmp >= (1 << shift)
        p += np.where(big, shift, 0)
        tmp = np.where(big, tmp >> shift, tmp)
    nbits = np.where(small, 0, p - msb - lsb)
    token = ((1 << split) + ((p - split) << (msb + lsb))
             + (((vv >> np.maximum(p - msb, 0)) & ((1 << msb) - 1)) << lsb)
             + (vv & ((1 << lsb) - 1)))
    token = np.where(small, v, token)
    raw = np.where(small, 0, (vv >> lsb) & ((np.int64(1) << np.maximum(nbits, 0)) - 1))
    return token, nbits, raw
