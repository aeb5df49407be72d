import itertools

import numpy as np
import pytest

from modcodec.bitio import BitReader, BitWriter
from modcodec.errors import CorruptStreamError
from modcodec.modular.channel import Channel
from modcodec.modular.predictors import GRADIENT, WEIGHTED
from modcodec.transforms import palette as PAL
from modcodec.transforms.chain import (
    Palette,
    Rct,
    Shape,
    Squeeze,
    apply_chain,
    plan_chain,
    read_chain,
    undo_chain,
    write_chain,
)
from modcodec.transforms.rct import forward_triple, inverse_triple, rct_forward, rct_inverse
from modcodec.transforms.squeeze import (
    SqueezeStep,
    default_squeeze_steps,
    squeeze_avg,
    squeeze_forward,
    squeeze_inverse,
    tendency,
    tendency_array,
)


def chans(*arrays):
    return [Channel(np.asarray(a, dtype=np.int64)) for a in arrays]


# ---- RCT ---------------------------------------------------------------------

def test_rct_examples():
    assert forward_triple(1, 2, 3, 10) == (2, 1, -1)  # SubtractGreen
    assert forward_triple(0, 0, 0, 6) == (0, 0, 0)
    assert forward_triple(100, 50, 30, 6) == (57, 70, -15)
    assert inverse_triple(57, 70, -15, 6) == (100, 50, 30)
    assert forward_triple(5, 6, 7, 0) == (5, 6, 7)


def test_rct_exhaustive_small_cube():
    for t in range(42):
        for v in itertools.product(range(-4, 5), repeat=3):
            assert inverse_triple(*forward_triple(*v, t), t) == v


def test_rct_on_planes():
    rng = np.random.default_rng(0)
    orig = rng.integers(0, 1 << 16, (3, 20, 30))
    for t in range(42):
        ch = chans(*orig)
        rct_forward(ch, 0, t)
        rct_inverse(ch, 0, t)
        assert all((c.data == o).all() for c, o in zip(ch, orig))


def test_rct_needs_matching_channels():
    with pytest.raises(ValueError):
        rct_forward(chans(np.zeros((2, 2)), np.zeros((2, 3)), np.zeros((2, 2))), 0, 6)
    with pytest.raises(ValueError):
        rct_forward(chans(np.zeros((2, 2)), np.zeros((2, 2))), 0, 6)


# ---- palette -------------------------------------------------------------------

def test_implicit_palette_examples():
    assert PAL.implicit_palette_color(0, 8) == (32, 32, 32)
    assert PAL.implicit_palette_color(64, 8) == (0, 0, 0)
    assert PAL.implicit_palette_color(188, 8) == (255, 255, 255)
    assert PAL.implicit_palette_color(63, 8) == (223, 223, 223)
    with pytest.raises(ValueError):
        PAL.implicit_palette_color(189, 8)


def test_implicit_delta_table():
    t = PAL.IMPLICIT_DELTAS
    assert len(t) == 143 and len(set(t)) == 143
    assert t[0] == (0, 0, 0)
    for k in range(71):
        assert t[2 * k + 2] == tuple(-c for c in t[2 * k + 1])
    assert PAL.implicit_delta(-1) == (0, 0, 0)
    with pytest.raises(ValueError):
        PAL.implicit_delta(-144)


def test_delta_zero_reproduces_ramp():
    h, w = 6, 9
    y, x = np.mgrid[0:h, 0:w]
    planes = [x + 10, 2 * x - y + 40, 3 * x + 5]
    # explicit colors for the first row and column, zero deltas elsewhere
    colors = [(0, 0, 0)]
    idx = np.zeros((h, w), dtype=np.int64)
    for yy, xx in itertools.product(range(h), range(w)):
        if yy == 0 or xx == 0:
            colors.append(tuple(int(p[yy, xx]) for p in planes))
            idx[yy, xx] = len(colors) - 1
    meta = np.array(colors).T
    ch = chans(meta, idx)
    PAL.palette_inverse(ch, 0, 3, num_deltas=1, predictor=GRADIENT)
    assert len(ch) == 3
    for c, p in zip(ch, planes):
        assert (c.data == p).all()


def test_delta_with_weighted_predictor_runs():
    idx = np.array([[1, 0, -2], [0, -3, 1]])
    ch = chans(np.array([[0, 5], [0, 5], [0, 5]]), idx)
    PAL.palette_inverse(ch, 0, 3, num_deltas=1, predictor=WEIGHTED)
    assert ch[0].data[0, 0] == 5


def test_channel_palette_16bit():
    a = np.where(np.random.default_rng(1).random((8, 8)) < 0.5, 7, 900)
    ch = chans(a)
    colors = PAL.palette_forward(ch, 0, 1, bit_depth=16)
    assert colors == [(7,), (900,)]
    assert set(np.unique(ch[1].data)) <= {0, 1}
    PAL.palette_inverse(ch, 0, 1, bit_depth=16)
    assert (ch[0].data == a).all()


def test_pure_implicit_palette():
    rng = np.random.default_rng(2)
    picks = rng.integers(0, 189, (5, 7))
    rgb = np.array([PAL.implicit_palette_color(int(i), 8) for i in picks.reshape(-1)])
    planes = [rgb[:, c].reshape(5, 7) for c in range(3)]
    ch = chans(*planes)
    PAL.palette_forward(ch, 0, 3, colors=[], bit_depth=8)
    assert ch[0].data.shape == (3, 0) and ch[1].data.min() >= 0
    PAL.palette_inverse(ch, 0, 3, bit_depth=8)
    for c, p in zip(ch, planes):
        assert (c.data == p).all()


def test_palette_roundtrip_with_alpha():
    rng = np.random.default_rng(3)
    cols = rng.integers(0, 256, (12, 4))
    pick = rng.integers(0, 12, (10, 11))
    planes = [cols[pick, c] for c in range(4)]
    ch = chans(*planes)
    PAL.palette_forward(ch, 0, 4)
    PAL.palette_inverse(ch, 0, 4)
    for c, p in zip(ch, planes):
        assert (c.data == p).all()


def test_palette_index_out_of_range():
    ch = chans(np.array([[1, 2]]), np.array([[0, 2 + 189]]))
    with pytest.raises(CorruptStreamError):
        PAL.palette_inverse(ch, 0, 1)
    ch = chans(np.array([[1, 2]]), np.array([[0, -144]]))
    with pytest.raises(CorruptStreamError):
        PAL.palette_inverse(ch, 0, 1)


# ---- squeeze -----------------------------------------------------------------------

def test_squeeze_avg_examples():
    assert squeeze_avg(3, 2) == 3
    assert squeeze_avg(2, 3) == 2
    assert squeeze_avg(5, 5) == 5
    assert squeeze_avg(-3, -4) == -3
    assert squeeze_avg(-4, -3) == -4


def test_tendency_examples():
    assert tendency(7, 7, 7) == 0
    assert tendency(1, 5, 2) == 0
    assert tendency(5, 1, 4) == 0
    assert tendency(12, 8, 4) == 2
    assert tendency(4, 8, 12) == -2


def test_tendency_vector_matches_scalar():
    rng = np.random.default_rng(4)
    a, b, c = rng.integers(-50, 50, (3, 20000))
    got = tendency_array(a, b, c)
    want = [tendency(int(x), int(y), int(z)) for x, y, z in zip(a, b, c)]
    assert (got == want).all()


def test_no_overshoot_sampled():
    rng = np.random.default_rng(5)
    a, b, c = rng.integers(-300, 300, (3, 100000))
    t = tendency_array(a, b, c)
    A = b + np.where(t >= 0, t >> 1, -((-t) >> 1))
    B = A - t
    lo = np.minimum(np.minimum(a, b), c)
    hi = np.maximum(np.maximum(a, b), c)
    assert ((A >= lo) & (A <= hi) & (B >= lo) & (B <= hi)).all()


def test_squeeze_constant():
    ch = Channel(np.full((6, 7), 42))
    for hz in (True, False):
        d, r = squeeze_forward(ch, hz)
        assert (d.data == 42).all() and (r.data == 0).all()


@pytest.mark.parametrize("shape", [(17, 9), (9, 17), (1, 1), (1, 2), (2, 1), (3, 3)])
def test_squeeze_roundtrip(shape):
    a = np.random.default_rng(6).integers(-1000, 1000, shape)
    for hz in (True, False):
        d, r = squeeze_forward(Channel(a), hz)
        out = squeeze_inverse(d, r, hz, shape[1] if hz else shape[0])
        assert (out.data == a).all()


def test_zero_residual_ramp_no_overshoot():
    a = np.cumsum(np.random.default_rng(7).integers(0, 20, (4, 32)), axis=1)
    d, r = squeeze_forward(Channel(a), True)
    out = squeeze_inverse(d, Channel(np.zeros_like(r.data)), True, 32).data
    down = d.data
    for y in range(4):
        for i in range(16):
            lo = min(down[y, max(i - 1, 0)], down[y, i])
            hi = max(down[y, i], down[y, min(i + 1, 15)])
            lo = min(lo, out[y, 2 * i - 1] if i else lo)
            assert lo <= out[y, 2 * i] and out[y, 2 * i + 1] <= hi
        assert (np.diff(out[y]) >= 0).all()


def test_default_squeeze_orders():
    s = default_squeeze_steps(256, 256, 0, 3)
    assert len(s) == 10 and [st.horizontal for st in s] == [True, False] * 5
    assert default_squeeze_steps(8, 8, 0, 1) == []
    s = default_squeeze_steps(256, 64, 0, 1)
    assert [st.horizontal for st in s[:3]] == [True, True, True]
    assert [st.horizontal for st in s[3:]] == [False, True, False, True, False]
    ch = [Channel(np.zeros((256, 256)))]
    plan = plan_chain([Squeeze()], [Shape(256, 256)])
    assert plan.shapes[0][:2] == (8, 8)
    apply_chain([Squeeze()], ch)
    assert ch[0].data.shape == (8, 8)


# ---- chains ------------------------------------------------------------------------

CHAINS = [
    [],
    [Rct(0, 6), Squeeze()],
    [Palette(0, 3, 0), Squeeze()],
    [Palette(0, 2, 0), Rct(1, 6)],
    [Rct(0, 10), Squeeze(), Rct(0, 3)],
    [Squeeze((SqueezeStep(True, False, 1, 2), SqueezeStep(False, True, 0, 3)))],
]


@pytest.mark.parametrize("specs", CHAINS)
@pytest.mark.parametrize("shape", [(1, 1), (13, 40), (33, 20)])
def test_chain_roundtrip(specs, shape):
    rng = np.random.default_rng(8)
    hi = 4 if any(isinstance(s, Palette) for s in specs) else 1 << 12
    orig = [rng.integers(0, hi, shape) for _ in range(4)]
    ch = chans(*orig)
    done = apply_chain(specs, ch)
    bw = BitWriter()
    write_chain(bw, done)
    back = read_chain(BitReader(bw.getvalue()))
    assert back == done
    plan = plan_chain(back, [Shape(shape[1], shape[0])] * 4)
    assert [(c.width, c.height, c.hshift, c.vshift) for c in ch] == [tuple(s) for s in plan.shapes]
    undo_chain(ch, plan)
    assert len(ch) == 4
    for c, o in zip(ch, orig):
        assert (c.data == o).all()


def test_palette_then_rct_on_remaining():
    rng = np.random.default_rng(9)
    orig = [rng.integers(0, 3, (9, 9)) for _ in range(3)] + [rng.integers(0, 256, (9, 9))
                                                             for _ in range(3)]
    ch = chans(*orig)
    done = apply_chain([Palette(0, 3, 0), Rct(2, 6)], ch)
    plan = plan_chain(done, [Shape(9, 9)] * 6)
    undo_chain(ch, plan)
    for c, o in zip(ch, orig):
        assert (c.data == o).all()


def test_invalid_chains_rejected():
    shapes = [Shape(4, 4)] * 3
    with pytest.raises(CorruptStreamError):
        plan_chain([Rct(1, 6)], shapes)
    with pytest.raises(CorruptStreamError):
        plan_chain([Palette(0, 4, 3)], shapes)
    with pytest.raises(CorruptStreamError):
        plan_chain([Palette(0, 3, 3, 5)], shapes)
    with pytest.raises(CorruptStreamError):
        plan_chain([Squeeze((SqueezeStep(True, True, 2, 2),))], shapes)
    bw = BitWriter()
    bw.write_u32(1, (0, 0), (1, 0), (2, 4), (18, 8))
    bw.write(2, 3)
    with pytest.raises(CorruptStreamError):
        read_chain(BitReader(bw.getvalue()))
