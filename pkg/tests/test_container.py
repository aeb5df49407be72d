import numpy as np
import pytest

from modcodec import (
    CorruptStreamError,
    EndOfStreamError,
    InvalidRequestError,
    decode_image,
    decode_progressive,
    decode_roi,
    encode_image,
    encode_with_info,
    inspect_stream,
)
from modcodec.bitio import BitReader, BitWriter
from modcodec.container.headers import (
    FrameHeader,
    ImageHeader,
    read_frame_header,
    read_image_header,
    read_size_header,
    write_frame_header,
    write_image_header,
    write_size_header,
)
from modcodec.container.layout import Layout
from modcodec.container.orientation import orient, stored_rect
from modcodec.container.toc import (
    _lehmer_tokens,
    lehmer_decode,
    lehmer_encode,
    read_permutation,
    read_toc,
    read_toc_entry,
    write_permutation,
    write_toc,
    write_toc_entry,
)
from modcodec.transforms.chain import Shape


def size_bits(w, h):
    bw = BitWriter()
    write_size_header(bw, w, h)
    return bw


def smooth_rgb(h, w, seed=0, noise=3):
    rng = np.random.default_rng(seed)
    y, x = np.mgrid[0:h, 0:w]
    img = np.stack([(x * 3 + y) % 256, (x + 2 * y) % 256, (x * y // 7) % 256], -1)
    img = img + rng.integers(-noise, noise + 1, img.shape)
    return np.clip(img, 0, 255).astype(np.uint8)


# ---- size header -------------------------------------------------------------

def test_size_header_thumbnail_is_nine_bits():
    bw = size_bits(120, 80)
    assert bw.bit_length == 9
    data = bw.getvalue()
    br = BitReader(data)
    assert br.read_bool()                  # small
    assert br.read(5) == 80 // 8 - 1
    assert br.read(3) == 4                 # 3:2
    assert read_size_header(BitReader(data)) == (120, 80)


def test_size_header_square_and_camera():
    data = size_bits(256, 256).getvalue()
    br = BitReader(data)
    assert br.read_bool() and br.read(5) == 31 and br.read(3) == 1
    bw = size_bits(4032, 3024)
    br = BitReader(bw.getvalue())
    assert not br.read_bool()
    assert br.read_u32((1, 9), (1, 13), (1, 18), (1, 30)) == 3024
    assert br.read(3) == 3                 # 4:3
    assert read_size_header(BitReader(bw.getvalue())) == (4032, 3024)


@pytest.mark.parametrize("w,h", [(1, 1), (7, 8), (8, 8), (264, 256), (257, 3), (1 << 30, 1),
                                 (1, 1 << 30), (1000, 1), (300, 200), (2000, 1125)])
def test_size_header_round_trip(w, h):
    assert read_size_header(BitReader(size_bits(w, h).getvalue())) == (w, h)


@pytest.mark.parametrize("w,h", [(0, 5), (5, 0), ((1 << 30) + 1, 1)])
def test_size_header_rejects(w, h):
    with pytest.raises(ValueError):
        write_size_header(BitWriter(), w, h)


def test_image_and_frame_header_round_trip():
    hdr = ImageHeader(300, 200, 12, 1, 2, 6, False)
    fh = FrameHeader(2, 2, None)
    bw = BitWriter()
    write_image_header(bw, hdr)
    write_frame_header(bw, fh, hdr.xyb_encoded)
    br = BitReader(bw.getvalue())
    assert read_image_header(br) == hdr
    assert read_frame_header(br, False) == fh
    xyb = ImageHeader(16, 16, 8, 3, 0, 1, True)
    fx = FrameHeader(0, 1, (4096, 1024, 77777))
    bw = BitWriter()
    write_image_header(bw, xyb)
    write_frame_header(bw, fx, True)
    br = BitReader(bw.getvalue())
    assert read_image_header(br) == xyb
    assert read_frame_header(br, True) == fx


def test_frame_group_dims():
    assert [FrameHeader(s).group_dim for s in range(4)] == [128, 256, 512, 1024]


# ---- TOC -----------------------------------------------------------------------

@pytest.mark.parametrize("length,m,payload", [(100, 0, 100), (1024, 1, 0), (4211712, 3, 0),
                                              (17407, 1, 16383), (0, 0, 0), (1023, 0, 1023),
                                              (17408, 2, 0), (4211711, 2, (1 << 22) - 1)])
def test_toc_entry(length, m, payload):
    bw = BitWriter()
    assert write_toc_entry(bw, length) == m
    data = bw.getvalue()
    br = BitReader(data)
    assert br.read(2) == m
    assert br.read((10, 14, 22, 30)[m]) == payload
    assert read_toc_entry(BitReader(data)) == length


def test_toc_entry_overflow():
    with pytest.raises(ValueError):
        write_toc_entry(BitWriter(), 4211712 + (1 << 30))


def test_lehmer_examples():
    assert lehmer_encode([0, 1, 2, 3]) == [0, 0, 0, 0]
    assert lehmer_encode([2, 0, 1]) == [2, 0, 0]
    assert lehmer_decode([2, 0, 0]) == [2, 0, 1]
    ctx, vals = _lehmer_tokens([0, 0, 0, 0])
    assert vals == [0]                     # just the count
    ctx, vals = _lehmer_tokens([2, 0, 0])
    assert vals == [1, 2] and ctx[1] == 0  # first element in context 0


def test_lehmer_rejects():
    with pytest.raises(ValueError):
        lehmer_encode([0, 0, 1])
    with pytest.raises(CorruptStreamError):
        lehmer_decode([3, 0, 0])


def test_permutation_round_trip_200():
    perm = list(np.random.default_rng(5).permutation(200))
    bw = BitWriter()
    write_permutation(bw, perm)
    assert read_permutation(BitReader(bw.getvalue()), 200) == perm


def test_toc_round_trip():
    lengths = [5, 0, 1500, 70000, 12]
    for perm in (None, [0, 3, 1, 4, 2]):
        bw = BitWriter()
        write_toc(bw, lengths, perm)
        got, p = read_toc(BitReader(bw.getvalue()), 5)
        assert got == lengths and p == perm


# ---- layout ----------------------------------------------------------------------

def test_layout_section_counts():
    lay = Layout(4032, 3024, [Shape(4032, 3024)] * 3, 0, 256)
    assert lay.num_sections == 193 and lay.num_groups == 192
    one = Layout(1, 1, [Shape(1, 1)], 0, 128)
    assert one.collapsed and one.num_sections == 1
    fits = Layout(128, 128, [Shape(128, 128)], 0, 128)
    assert fits.num_sections == 1


def test_layout_tiles_cover_channels():
    shapes = [Shape(300, 200), Shape(150, 100, 1, 1), Shape(40, 30, 3, 3)]
    lay = Layout(300, 200, shapes, 0, 128, num_passes=2)
    assert lay.num_sections == 1 + 2 * 6
    for ci, sh in enumerate(shapes):
        cover = np.zeros((sh.height, sh.width), int)
        for sec in lay.sections:
            for t in sec:
                if t.channel == ci:
                    cover[t.y0:t.y1, t.x0:t.x1] += 1
        assert (cover == 1).all()
    # small channels stay global, the full-resolution one is split in pass 2
    assert all(t.channel == 2 for t in lay.sections[0])
    assert lay.pass_of(shapes[0]) == 1 and lay.pass_of(Shape(75, 50, 2, 2)) == 0


def test_center_first_order_starts_at_center():
    lay = Layout(640, 640, [Shape(640, 640)], 0, 128)
    order = lay.center_first_order()
    assert order[0] == 0 and sorted(order) == list(range(lay.num_sections))
    assert lay.section_info(order[1]) == (0, 12)   # the middle group of a 5x5 grid


# ---- orientation -----------------------------------------------------------------

@pytest.mark.parametrize("o", range(1, 9))
def test_stored_rect_matches_orient(o):
    rng = np.random.default_rng(o)
    H, W = 7, 11
    stored = np.arange(H * W).reshape(H, W, 1)
    shown = orient(stored, o)
    dh, dw = shown.shape[:2]
    for _ in range(20):
        x, y = int(rng.integers(0, dw)), int(rng.integers(0, dh))
        w, h = int(rng.integers(1, dw - x + 1)), int(rng.integers(1, dh - y + 1))
        x0, y0, x1, y1 = stored_rect((x, y, w, h), o, W, H)
        crop = orient(stored[y0:y1, x0:x1], o)
        assert np.array_equal(crop, shown[y:y + h, x:x + w])


# ---- codec -----------------------------------------------------------------------

def test_one_pixel_image():
    img = np.array([[[1, 2, 3]]], dtype=np.uint8)
    data, info = encode_with_info(img)
    assert info["sections"] == 1
    assert np.array_equal(decode_image(data), img)


@pytest.mark.parametrize("shape,bits", [((13, 17), 1), ((13, 17), 5), ((20, 9, 2), 16),
                                        ((9, 20, 4), 8), ((6, 7, 3), 12)])
def test_round_trip_depths_and_layouts(shape, bits):
    rng = np.random.default_rng(bits)
    dtype = np.uint8 if bits <= 8 else np.uint16
    img = rng.integers(0, 1 << bits, shape).astype(dtype)
    for effort in (1, 4):
        data = encode_image(img, effort=effort, bit_depth=bits)
        out = decode_image(data)
        assert np.array_equal(out.reshape(img.shape), img)


def test_orientation_applied_on_decode():
    img = smooth_rgb(10, 14)
    data = encode_image(img, orientation=6, effort=1)
    assert np.array_equal(decode_image(data), orient(img, 6))


def test_permutation_and_progressive_equivalence():
    img = smooth_rgb(300, 290)
    base = encode_image(img, effort=2, group_size=128)
    perm = encode_image(img, effort=2, group_size=128, permutation="center-first")
    prog = encode_image(img, effort=2, group_size=128, progressive=True,
                        permutation="center-first")
    for data in (base, perm, prog):
        assert np.array_equal(decode_image(data), img)
    assert inspect_stream(perm)["toc"]["permutation"] is not None
    assert inspect_stream(base)["toc"]["permutation"] is None
    assert "Squeeze" in " ".join(inspect_stream(prog)["transforms"])


def test_toc_accounts_for_whole_file():
    for kw in ({}, {"permutation": "center-first"}, {"progressive": True}):
        data = encode_image(smooth_rgb(150, 200), effort=1, group_size=128, **kw)
        info = inspect_stream(data)
        assert info["toc"]["total"] == len(data) - info["header_bytes"]


def test_roi_aligned_group_reads_one_section():
    img = smooth_rgb(256, 256)
    data = encode_image(img, effort=2, group_size=128)
    stats = {}
    out = decode_roi(data, (128, 0, 128, 128), stats=stats)
    assert np.array_equal(out, img[0:128, 128:256])
    assert len(stats["sections_decoded"]) == 2 and 0 in stats["sections_decoded"]


def test_roi_matches_crop_with_squeeze_and_orientation():
    img = smooth_rgb(150, 200)
    data = encode_image(img, effort=2, group_size=128, progressive=True, orientation=5)
    full = decode_image(data)
    rng = np.random.default_rng(0)
    H, W = full.shape[:2]
    for _ in range(8):
        x, y = int(rng.integers(0, W)), int(rng.integers(0, H))
        w, h = int(rng.integers(1, W - x + 1)), int(rng.integers(1, H - y + 1))
        assert np.array_equal(decode_roi(data, (x, y, w, h)), full[y:y + h, x:x + w])
    assert np.array_equal(decode_roi(data, (0, 0, W, H)), full)
    with pytest.raises(InvalidRequestError):
        decode_roi(data, (0, 0, W + 1, H))


def test_progressive_prefixes():
    img = smooth_rgb(150, 200)
    data = encode_image(img, effort=2, group_size=128, progressive=True)
    info = inspect_stream(data)
    glob = info["header_bytes"] + info["toc"]["lengths"][0]
    lengths = info["toc"]["lengths"]
    preview, rep = decode_progressive(data[:glob])
    assert preview.shape == img.shape and not rep["complete"]
    # only the global section and empty sections are complete
    assert all(lengths[s] == 0 for s in rep["sections_available"][1:])
    assert rep["sections_missing"]
    # the preview is a coarse version of the image, not garbage
    assert np.abs(preview.astype(int) - img.astype(int)).mean() < 40
    out, rep = decode_progressive(data)
    assert rep["complete"] and np.array_equal(out, img)
    # cut inside the first non-empty group section: everything before it is used
    k = next(s for s in range(1, len(lengths)) if lengths[s])
    cut = glob + sum(lengths[1:k]) + lengths[k] // 2
    _, rep = decode_progressive(data[:cut])
    assert rep["sections_available"] == list(range(k))
    with pytest.raises(EndOfStreamError, match="missing sections"):
        decode_image(data[:cut])


def test_prefix_without_global_section_fails():
    data = encode_image(smooth_rgb(40, 40), effort=1)
    with pytest.raises(CorruptStreamError):
        decode_progressive(data[:6])


def test_trailing_bytes_rejected():
    data = encode_image(smooth_rgb(20, 20), effort=1)
    with pytest.raises(CorruptStreamError):
        decode_image(data + b"\0")


def test_bit_flips_detected():
    data = encode_image(smooth_rgb(40, 50), effort=3)
    start = inspect_stream(data)["header_bytes"]
    rng = np.random.default_rng(1)
    caught = 0
    trials = 200
    for _ in range(trials):
        pos = int(rng.integers(start * 8, len(data) * 8))
        bad = bytearray(data)
        bad[pos >> 3] ^= 1 << (pos & 7)
        try:
            out = decode_image(bytes(bad))
        except CorruptStreamError:
            caught += 1
        else:
            assert out.shape == (40, 50, 3)
    assert caught >= 0.97 * trials


def test_corruption_names_section():
    img = smooth_rgb(150, 200)
    data = encode_image(img, effort=1, group_size=128)
    info = inspect_stream(data)
    starts = np.cumsum([info["header_bytes"]] + info["toc"]["lengths"])
    bad = bytearray(data)
    bad[(starts[3] + starts[4]) // 2] ^= 0x10     # inside section 3
    with pytest.raises(CorruptStreamError) as e:
        decode_image(bytes(bad))
    assert e.value.section == 3


def test_deterministic_and_thread_independent():
    img = smooth_rgb(150, 200)
    a = encode_image(img, effort=5, group_size=128)
    b = encode_image(img, effort=5, group_size=128)
    assert a == b
    assert np.array_equal(decode_image(a, threads=1), decode_image(a, threads=4))


def test_lossy_xyb_close():
    img = smooth_rgb(40, 40)
    data = encode_image(img, lossy_xyb=(4096, 1024, 4096), effort=2)
    out = decode_image(data)
    assert out.shape == img.shape
    assert np.abs(out.astype(int) - img.astype(int)).mean() < 4
    assert inspect_stream(data)["header"]["xyb"]
