import random

import numpy as np
import pytest

from modcodec.bitio import BitReader, BitWriter
from modcodec.entropy import ans
from modcodec.entropy.context_map import (
    _nested_bits,
    mtf_apply,
    mtf_undo,
    read_context_map,
    write_context_map,
)
from modcodec.entropy.lz77 import SPECIAL_DISTANCES, DistanceMap, special_distance
from modcodec.entropy.prefix import PrefixCode, canonical_codes, huffman_lengths
from modcodec.entropy.stream import (
    build_entropy_code,
    read_entropy_code,
    write_entropy_code,
    write_symbols,
)
from modcodec.errors import CorruptStreamError

MTF_IN = [0, 1, 2, 2, 2, 2, 3, 4, 5, 6, 7, 7, 7, 7, 8, 9, 10, 11, 12, 13, 14, 15, 15, 15, 15,
          0, 0, 15, 0, 1, 0, 0, 0, 0, 14, 15, 15, 15, 15, 14, 13, 12, 11, 10, 15, 13, 9, 8]
MTF_OUT = [0, 1, 2, 0, 0, 0, 3, 4, 5, 6, 7, 0, 0, 0, 8, 9, 10, 11, 12, 13, 14, 15, 0, 0, 0,
           15, 0, 1, 1, 15, 1, 0, 0, 0, 3, 3, 0, 0, 0, 1, 4, 5, 6, 7, 5, 4, 8, 9]


def roundtrip(streams, nctx, widths=None, **kw):
    code, syms = build_entropy_code(streams, nctx, widths=widths, **kw)
    bw = BitWriter()
    write_entropy_code(bw, code)
    header = bw.bit_length
    for s in syms:
        write_symbols(bw, code, s)
    data = bw.getvalue()
    br = BitReader(data)
    dec = read_entropy_code(br, nctx)
    widths = widths or [1] * len(streams)
    for (c, v), w in zip(streams, widths):
        r = dec.reader(br, lz77_width=w)
        out = [r.read(int(x)) for x in c]
        r.finish()
        assert out == [int(x) for x in v]
    return bw.bit_length, header, code, syms


# ---- distributions -------------------------------------------------------

def test_normalize_examples():
    assert ans.normalize_histogram([1, 1]) == [2048, 2048]
    assert ans.normalize_histogram([3, 1]) == [3072, 1024]
    assert ans.normalize_histogram([1, 0, 1]) == [2048, 0, 2048]


def test_normalize_keeps_rare_tokens():
    f = ans.normalize_histogram([10 ** 6] + [1] * 200)
    assert sum(f) == 4096 and min(f) == 1


def test_normalize_rejects_wide_alphabet():
    with pytest.raises(ValueError):
        ans.normalize_histogram([1] * 257)


def test_uniform_rule():
    assert ans.uniform_distribution(3) == [1024] * 4
    assert ans.uniform_distribution(4) == [820, 819, 819, 819, 819]


@pytest.mark.parametrize("freqs", [
    [0] * 7 + [4096],
    [1000, 0, 3096],
    ans.uniform_distribution(4),
    ans.uniform_distribution(200),
    ans.normalize_histogram([5, 0, 0, 0, 3, 9, 0, 1] + [0] * 40 + [2]),
])
def test_distribution_roundtrip(freqs):
    bw = BitWriter()
    ans.write_distribution(bw, freqs)
    got = ans.read_distribution(BitReader(bw.getvalue()))
    assert got == freqs and sum(got) == 4096


def test_distribution_random_roundtrip():
    rng = random.Random(5)
    for _ in range(200):
        n = rng.randint(1, 256)
        counts = [rng.choice([0, 0, 1, rng.randint(1, 1000)]) for _ in range(n)]
        if not any(counts):
            counts[-1] = 1
        f = ans.normalize_histogram(counts)
        while f[-1] == 0:
            f.pop()
        bw = BitWriter()
        ans.write_distribution(bw, f)
        assert ans.read_distribution(BitReader(bw.getvalue())) == f


def test_bad_distribution_rejected():
    bw = BitWriter()
    bw.write(2, 0)  # general case
    bw.write_u8(2)
    for f in (4000, 200):  # already above 4096 before the implied last entry
        ans._write_hybrid_freq(bw, f)
    with pytest.raises(CorruptStreamError):
        ans.read_distribution(BitReader(bw.getvalue()))


# ---- ANS -------------------------------------------------------------------

def test_empty_stream_state():
    bw = BitWriter()
    ans.ans_encode_steps([], bw)
    assert BitReader(bw.getvalue()).read(32) == ans.INITIAL_STATE


def test_singleton_costs_no_bits():
    z = np.zeros(10000, dtype=np.int64)
    total, header, code, _ = roundtrip([(z, z + 7)], 1)
    assert total - header == 32


def test_known_distribution_roundtrip():
    rng = np.random.default_rng(2)
    vals = rng.choice(10, size=10000, p=np.arange(1, 11) / 55)
    roundtrip([(np.zeros_like(vals), vals)], 1)


def test_zero_stream_is_cheap():
    z = np.zeros(100000, dtype=np.int64)
    total, _, _, _ = roundtrip([(z, z)], 1)
    assert total / len(z) < 0.05


def test_entropy_bound():
    rng = np.random.default_rng(11)
    p = rng.dirichlet(np.ones(256))
    vals = rng.choice(256, size=100000, p=p)
    total, _, _, _ = roundtrip([(np.zeros_like(vals), vals)], 1)
    c = np.bincount(vals)
    c = c[c > 0]
    h = -(c * np.log2(c / c.sum())).sum()
    assert total <= 1.01 * h + 32


def test_random_multicontext_roundtrip():
    rng = np.random.default_rng(3)
    vals = rng.integers(0, 1 << 20, 10000)
    ctx = rng.integers(0, 4, 10000)
    roundtrip([(ctx, vals)], 4)
    roundtrip([(ctx, vals)], 4, use_prefix=True)


def test_final_state_mismatch_detected():
    rng = np.random.default_rng(4)
    vals = rng.integers(0, 50, 2000)
    code, syms = build_entropy_code([(np.zeros_like(vals), vals)], 1)
    bw = BitWriter()
    write_entropy_code(bw, code)
    start = bw.bit_length
    write_symbols(bw, code, syms[0])
    data = bytearray(bw.getvalue())
    pos = start + 40
    data[pos >> 3] ^= 1 << (pos & 7)
    br = BitReader(bytes(data))
    dec = read_entropy_code(br, 1)
    r = dec.reader(br)
    with pytest.raises(CorruptStreamError):
        for _ in range(len(vals)):
            r.read(0)
        r.finish()


# ---- prefix codes ----------------------------------------------------------

def _msb(codes, lengths):
    return [format(c, f"0{n}b")[::-1] for c, n in zip(codes, lengths)]


def test_canonical_examples():
    assert _msb(canonical_codes([1, 1]), [1, 1]) == ["0", "1"]
    assert _msb(canonical_codes([1, 2, 2]), [1, 2, 2]) == ["0", "10", "11"]


def test_single_symbol_zero_bits():
    pc = PrefixCode.from_counts([0, 0, 5])
    bw = BitWriter()
    for _ in range(10):
        pc.encode(bw, 2)
    assert bw.bit_length == 0
    assert pc.decode(BitReader(b"")) == 2


def test_kraft_violation():
    with pytest.raises(CorruptStreamError):
        PrefixCode([1, 1, 1])


def test_length_limit():
    fib = [1, 1]
    while len(fib) < 30:
        fib.append(fib[-1] + fib[-2])
    lengths = huffman_lengths(fib)
    assert max(lengths) <= 15
    assert sum(2.0 ** -n for n in lengths) <= 1


# ---- context maps ----------------------------------------------------------

def test_mtf_example():
    assert mtf_apply(MTF_IN) == MTF_OUT
    assert mtf_undo(MTF_OUT) == MTF_IN
    assert mtf_apply([0, 0, 0]) == [0, 0, 0]
    assert mtf_apply([5]) == [5]


def test_mtf_random_identity():
    rng = random.Random(9)
    for _ in range(10000):
        seq = [rng.randrange(256) for _ in range(rng.randint(0, 20))]
        assert mtf_undo(mtf_apply(seq)) == seq


def test_simple_maps():
    bw = BitWriter()
    write_context_map(bw, [0, 1, 0, 1])
    assert bw.bit_length == 1 + 2 + 4
    bw = BitWriter()
    write_context_map(bw, [0])
    assert bw.bit_length == 3
    assert read_context_map(BitReader(bw.getvalue()), 1) == [0]


def test_complex_map_prefers_mtf():
    with_mtf = _nested_bits(mtf_apply(MTF_IN)).bit_length
    without = _nested_bits(MTF_IN).bit_length
    assert with_mtf < without
    bw = BitWriter()
    write_context_map(bw, MTF_IN)
    r = BitReader(bw.getvalue())
    assert r.read(1) == 0 and r.read(1) == 1
    assert read_context_map(BitReader(bw.getvalue()), len(MTF_IN)) == MTF_IN


def test_context_map_rejects_gaps():
    bw = BitWriter()
    bw.write(1, 1)
    bw.write(2, 2)
    for c in (0, 2):
        bw.write(2, c)
    with pytest.raises(CorruptStreamError):
        read_context_map(BitReader(bw.getvalue()), 2)


# ---- LZ77 --------------------------------------------------------------------

def test_special_distance_table():
    assert len(SPECIAL_DISTANCES) == 120 == len(set(SPECIAL_DISTANCES))
    assert SPECIAL_DISTANCES[0] == (0, 1)
    assert special_distance(0, 256) == 256
    assert all(special_distance(c, 1) >= 1 for c in range(120))
    assert all(dy > 0 or dx > 0 for dx, dy in SPECIAL_DISTANCES)


def test_linear_distance_continuation():
    dm = DistanceMap(256)
    assert dm.distance(120) == 1 + dm.max_special
    assert dm.distance(125) == 6 + dm.max_special
    assert dm.code(dm.distance(130)) == 130


def test_lz77_run_uses_copies():
    vals = np.full(500, 9, dtype=np.int64)
    ctx = np.zeros(500, dtype=np.int64)
    _, _, code, syms = roundtrip([(ctx, vals)], 1, lz77=True, widths=[20])
    assert code.lz77 is not None
    assert len(syms[0].tokens) < len(vals)


def test_lz77_2d_roundtrip():
    rng = np.random.default_rng(8)
    row = rng.integers(0, 300, 32)
    vals = np.concatenate([row, row, rng.integers(0, 3, 64), row, row])
    ctx = rng.integers(0, 3, len(vals))
    roundtrip([(ctx, vals)], 3, lz77=True, widths=[32])
    roundtrip([(ctx, vals)], 3, lz77=True, widths=[32], use_prefix=True)


def test_lz77_distance_past_history_rejected():
    vals = np.full(50, 3, dtype=np.int64)
    code, syms = build_entropy_code([(np.zeros(50, np.int64), vals)], 1, lz77=True, widths=[1])
    bw = BitWriter()
    write_entropy_code(bw, code)
    write_symbols(bw, code, syms[0])
    br = BitReader(bw.getvalue())
    dec = read_entropy_code(br, 1)
    # a wider row width than the encoder used points the first copy into the void
    r = dec.reader(br, lz77_width=1000)
    with pytest.raises(CorruptStreamError):
        for _ in range(50):
            r.read(0)


def test_nested_lz77_rejected():
    bw = BitWriter()
    bw.write(1, 1)
    with pytest.raises(CorruptStreamError):
        read_entropy_code(BitReader(bw.getvalue() + b"\0" * 8), 1, allow_lz77=False)


def test_multiple_streams_share_code():
    rng = np.random.default_rng(1)
    s = [(rng.integers(0, 2, 300), rng.integers(0, 40, 300)) for _ in range(3)]
    roundtrip(s, 2)
