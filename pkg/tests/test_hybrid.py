import random

import numpy as np
import pytest

from modcodec.entropy.hybrid import (
    HybridUintConfig,
    merge_token,
    pack_signed,
    pack_signed_array,
    split_token,
    split_tokens_array,
    token_raw_bits,
    unpack_signed,
    unpack_signed_array,
)

# Rows transcribed from the published example table: n -> (token, raw) per config.
FIG_ROWS = {
    (2, 1, 0): {0: (0, ""), 1: (1, ""), 2: (2, ""), 3: (3, ""), 4: (4, "0"), 5: (4, "1"),
                6: (5, "0"), 7: (5, "1"), 8: (6, "00"), 9: (6, "01"), 10: (6, "10"),
                11: (6, "11"), 12: (7, "00"), 15: (7, "11"), 16: (8, "000"), 23: (8, "111"),
                24: (9, "000"), 31: (9, "111"), 32: (10, "0000"), 47: (10, "1111"),
                48: (11, "0000"), 255: (15, "111111"), 256: (16, "0000000"),
                257: (16, "0000001"), 258: (16, "0000010")},
    (3, 0, 1): {0: (0, ""), 1: (1, ""), 2: (2, ""), 3: (3, ""), 4: (4, ""), 5: (5, ""),
                6: (6, ""), 7: (7, ""), 8: (8, "00"), 9: (9, "00"), 10: (8, "01"),
                11: (9, "01"), 12: (8, "10"), 15: (9, "11"), 16: (10, "000"), 23: (11, "011"),
                24: (10, "100"), 31: (11, "111"), 32: (12, "0000"), 47: (13, "0111"),
                48: (12, "1000"), 255: (17, "111111"), 256: (18, "0000000"),
                257: (19, "0000000"), 258: (18, "0000001")},
    (3, 2, 1): {0: (0, ""), 1: (1, ""), 2: (2, ""), 3: (3, ""), 4: (4, ""), 5: (5, ""),
                6: (6, ""), 7: (7, ""), 8: (8, ""), 9: (9, ""), 10: (10, ""), 11: (11, ""),
                12: (12, ""), 15: (15, ""), 16: (16, "0"), 23: (19, "1"), 24: (20, "0"),
                31: (23, "1"), 32: (24, "00"), 47: (27, "11"), 48: (28, "00"),
                255: (47, "1111"), 256: (48, "00000"), 257: (49, "00000"), 258: (48, "00001")},
}

BIG_N = 7777777
BIG_ROWS = {
    (2, 1, 0): (45, "101101010110111110001"),
    (3, 0, 1): (47, "110110101011011111000"),
    (3, 2, 1): (167, "0110101011011111000"),
    (3, 3, 0): (166, "1101010110111110001"),
    (3, 0, 3): (161, "1101101010110111110"),
    (7, 3, 0): (254, "1101010110111110001"),
    (0, 0, 0): (23, "1101101010110111110001"),
}


def _raw_string(nbits, raw):
    return format(raw, f"0{nbits}b") if nbits else ""


@pytest.mark.parametrize("cfg", sorted(FIG_ROWS))
def test_table_rows(cfg):
    c = HybridUintConfig(*cfg)
    for n, (token, raw) in FIG_ROWS[cfg].items():
        t, nb, r = split_token(n, c)
        assert (t, _raw_string(nb, r)) == (token, raw), n


@pytest.mark.parametrize("cfg", sorted(BIG_ROWS))
def test_large_value_rows(cfg):
    t, nb, r = split_token(BIG_N, HybridUintConfig(*cfg))
    assert (t, _raw_string(nb, r)) == BIG_ROWS[cfg]


def _configs():
    rng = random.Random(7)
    cfgs = {HybridUintConfig(*c) for c in list(FIG_ROWS) + list(BIG_ROWS)}
    while len(cfgs) < 60:
        s = rng.randint(0, 15)
        m = rng.randint(0, s)
        l = rng.randint(0, s - m)
        cfgs.add(HybridUintConfig(s, m, l))
    return sorted(cfgs)


def test_merge_inverts_split_exhaustive():
    values = np.arange(1 << 20, dtype=np.int64)
    for cfg in _configs():
        tok, nb, raw = split_tokens_array(values, cfg)
        # spot-check the scalar path on a stride of the range
        for v in range(0, 1 << 20, 4099):
            t, n, r = split_token(v, cfg)
            assert (t, n, r) == (tok[v], nb[v], raw[v])
            assert token_raw_bits(t, cfg) == n
            assert merge_token(t, r, cfg) == v
        # vectorized inverse check over the full range
        s, m, l = cfg
        big = tok >= (1 << s)
        t = tok - (1 << s)
        low = t & ((1 << l) - 1)
        top = ((t >> l) & ((1 << m) - 1)) | (1 << m)
        merged = np.where(big, (((top << nb) | raw) << l) | low, tok)
        assert np.array_equal(merged, values), cfg


def test_large_values():
    rng = random.Random(3)
    for cfg in _configs():
        for _ in range(200):
            v = rng.getrandbits(32)
            t, n, r = split_token(v, cfg)
            assert merge_token(t, r, cfg) == v


def test_pack_signed():
    assert [pack_signed(k) for k in (0, -1, 1, -2, 2, -3, 3)] == list(range(7))
    assert pack_signed(-2) == 3
    assert pack_signed(1000) == 2000
    for k in range(-1000, 1000):
        assert unpack_signed(pack_signed(k)) == k
    a = np.arange(-500, 500)
    assert np.array_equal(unpack_signed_array(pack_signed_array(a)), a)


def test_config_validation():
    HybridUintConfig(4, 2, 2).validate()
    with pytest.raises(ValueError):
        HybridUintConfig(2, 2, 1).validate()
    with pytest.raises(ValueError):
        HybridUintConfig(16, 0, 0).validate()
