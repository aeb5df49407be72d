"""Whole-image encoding and decoding.

File layout::

    signature (2 bytes)
    image header, frame header           (bit packed, then byte aligned)
    TOC                                  (permutation, lengths; byte aligned)
    sections                             (each byte aligned)

The global section carries the transform chain, the weighted predictor
parameters, the MA tree, the entropy code shared by every section and the
samples of the small channels.  Every other section is one ANS stream of
channel tiles.
"""

import time
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from ..bitio import BitReader, BitWriter
from ..color import DEFAULT_XYB_SCALES, samples_to_xyb_ints, xyb_ints_to_samples
from ..entropy.stream import build_entropy_code, read_entropy_code, write_entropy_code, \
    write_symbols
from ..errors import CodecError, CorruptStreamError, EndOfStreamError, InvalidRequestError, \
    UnsupportedError
from ..heuristics.effort import effort_config, fixed_tree
from ..heuristics.selection import choose_transforms
from ..heuristics.tree_learning import gather_samples, learn_tree
from ..modular.channel import Channel, compute_wp_arrays, decode_channel, encode_channel
from ..modular.predictors import WEIGHTED, neighbor_arrays
from ..modular.properties import PrevChannel
from ..modular.tree import MAX_PREV_CHANNELS, NUM_STATIC_PROPERTIES, read_tree, write_tree
from ..modular.weighted import DEFAULT_WP, read_wp_params, write_wp_params
from ..transforms.chain import Palette, Shape, Squeeze, apply_chain, describe, plan_chain, \
    read_chain, undo_chain, write_chain
from ..transforms.palette import NonLocalPalette
from .headers import SIGNATURE, FrameHeader, ImageHeader, read_frame_header, \
    read_image_header, write_frame_header, write_image_header
from .layout import Layout
from .orientation import orient, stored_rect
from .toc import read_toc, write_toc

GROUP_SIZES = (128, 256, 512, 1024)
MAX_DECODE_SAMPLES = 1 << 28
CRC_BYTES = 4           # CRC-32 trailer of every non-empty section


@dataclass
class EncodeOptions:
    effort: int = 7
    group_size: int = 256
    progressive: bool = False
    permutation: str = "none"                       # or "center-first"
    lossy_xyb: Optional[Tuple[int, int, int]] = None  # (Y, X, B') scales
    use_prefix: bool = False

    def validate(self):
        effort_config(self.effort)
        if self.group_size not in GROUP_SIZES:
            raise ValueError("group size must be one of %s" % (GROUP_SIZES,))
        if self.permutation not in ("none", "center-first"):
            raise ValueError("permutation must be 'none' or 'center-first'")


class _Tile:
    """One channel tile as seen by the encoder."""

    __slots__ = ("data", "channel", "stream", "prev", "nb", "wp", "key", "pc")

    def __init__(self, data, channel, stream, key):
        self.data = data
        self.channel = channel
        self.stream = stream
        self.key = key
        self.prev = []
        self.nb = neighbor_arrays(data)
        self.wp = None
        self.pc = None


def _prev_lists(keys):
    """For each position, earlier positions with an equal key, most recent first."""
    seen = {}
    out = []
    for i, k in enumerate(keys):
        lst = seen.setdefault(k, [])
        out.append(lst[::-1][:MAX_PREV_CHANNELS])
        lst.append(i)
    return out


def _tile_key(t, shape):
    return (t.width, t.height, shape.hshift, shape.vshift)


# ---- encoder ---------------------------------------------------------------------

def _infer_header(pixels, bit_depth=None, orientation=1):
    a = np.asarray(pixels)
    if a.ndim == 2:
        a = a[:, :, None]
    if a.ndim != 3 or a.shape[2] < 1:
        raise ValueError("pixels must be (height, width[, channels])")
    h, w, c = a.shape
    if bit_depth is None:
        if a.dtype == np.uint8:
            bit_depth = 8
        elif a.dtype == np.uint16:
            bit_depth = 16
        else:
            bit_depth = max(1, int(a.max(initial=0)).bit_length())
    ncolor = 1 if c < 3 else 3
    return ImageHeader(w, h, bit_depth, ncolor, c - ncolor, orientation)


def _as_planes(pixels, header):
    a = np.asarray(pixels)
    if a.ndim == 2:
        a = a[:, :, None]
    if a.shape != (header.height, header.width, header.num_channels):
        raise ValueError("pixel array shape %s does not match the header" % (a.shape,))
    a = a.astype(np.int64)
    maxval = (1 << header.bit_depth) - 1
    if a.size and (a.min() < 0 or a.max() > maxval):
        raise ValueError("sample values outside [0, %d]" % maxval)
    return [np.ascontiguousarray(a[:, :, k]) for k in range(a.shape[2])]


def encode_image(pixels, header=None, options=None, **kw):
    """Encode ``pixels`` (h, w[, c]) and return the container bytes.

    ``header`` defaults to one inferred from the array (8 or 16 bits from
    the dtype); keyword arguments are :class:`EncodeOptions` fields, plus
    ``bit_depth`` and ``orientation`` for the inferred header.
    """
    return encode_with_info(pixels, header, options, **kw)[0]


def encode_with_info(pixels, header=None, options=None, **kw):
    """Like :func:`encode_image` but also returns a dict describing the encoding."""
    bit_depth = kw.pop("bit_depth", None)
    orientation = kw.pop("orientation", 1)
    if options is None:
        options = EncodeOptions(**kw)
    elif kw:
        raise TypeError("pass either options or keyword options, not both")
    options.validate()
    if header is None:
        header = _infer_header(pixels, bit_depth, orientation)
    lossy = options.lossy_xyb is not None
    if lossy:
        header = ImageHeader(header.width, header.height, header.bit_depth,
                             header.num_color_channels, header.num_extra_channels,
                             header.orientation, True)
    header.validate()
    t0 = time.perf_counter()
    cfg = effort_config(options.effort)
    planes = _as_planes(pixels, header)
    scales = tuple(options.lossy_xyb) if lossy else None
    if lossy:
        planes[:3] = samples_to_xyb_ints(planes[:3], header.bit_depth, scales)
    channels = [Channel(p) for p in planes]

    specs = choose_transforms(channels, header.num_color_channels, cfg,
                              progressive=options.progressive, lossy=lossy)
    specs = apply_chain(specs, channels, header.bit_depth)
    plan = plan_chain(specs, [Shape(header.width, header.height)] * header.num_channels)
    assert [(c.width, c.height, c.hshift, c.vshift) for c in channels] == \
        [tuple(s) for s in plan.shapes]
    has_squeeze = any(isinstance(s, Squeeze) for s in specs)
    passes = 2 if options.progressive and has_squeeze else 1
    frame = FrameHeader(GROUP_SIZES.index(options.group_size), passes, scales)
    layout = Layout(header.width, header.height, plan.shapes, plan.nb_meta,
                    frame.group_dim, passes)

    # tiles, with the previous-channel lists used by the properties
    sec_tiles = []
    for s, tiles in enumerate(layout.sections):
        built = []
        for t in tiles:
            sh = plan.shapes[t.channel]
            data = channels[t.channel].data[t.y0:t.y1, t.x0:t.x1]
            built.append(_Tile(np.ascontiguousarray(data), t.channel, s, _tile_key(t, sh)))
        for tile, prev in zip(built, _prev_lists([b.key for b in built])):
            tile.prev = [built[i] for i in prev]
        sec_tiles.append(built)
    all_tiles = [t for ts in sec_tiles for t in ts]
    for t in all_tiles:
        t.pc = PrevChannel(t.data)

    if cfg.learn_tree:
        need_wp = WEIGHTED in cfg.predictors or 15 in cfg.properties
    else:
        tree = fixed_tree(cfg.fixed_tree)
        need_wp = tree.needs_wp()
    if need_wp:
        for t in all_tiles:
            t.wp = compute_wp_arrays(t.data, DEFAULT_WP)
    if cfg.learn_tree:
        tree = learn_tree(gather_samples(_LearnView(all_tiles), cfg), cfg)

    streams = []
    widths = []
    for s, tiles in enumerate(sec_tiles):
        if not tiles and s:
            continue
        cs, vs = [], []
        for t in tiles:
            ctx, vals, _ = encode_channel(t.data, tree, t.channel, s, [p.pc for p in t.prev],
                                          DEFAULT_WP, nb=t.nb, wp_arrays=t.wp)
            cs.append(ctx)
            vs.append(vals)
        cat = np.concatenate(cs) if cs else np.zeros(0, np.int64)
        streams.append((s, cat, np.concatenate(vs) if vs else cat))
        widths.append(max([t.data.shape[1] for t in tiles], default=1))
    pairs = [(c, v) for _, c, v in streams]
    payload = None
    # LZ77 only pays off on repetitive content, so it has to win on size
    for lz in ((False, True) if cfg.lz77 else (False,)):
        code, syms = build_entropy_code(pairs, tree.num_contexts, use_prefix=options.use_prefix,
                                        lz77=lz, widths=widths)
        if lz and code.lz77 is None:
            break
        cand = _section_payloads(layout.num_sections, streams, syms, code, specs, tree)
        if payload is None or sum(map(len, cand)) < sum(map(len, payload)):
            payload = cand

    order = list(range(layout.num_sections))
    if options.permutation == "center-first":
        order = layout.center_first_order()
    head = BitWriter()
    write_image_header(head, header)
    write_frame_header(head, frame, header.xyb_encoded)
    head.align()
    write_toc(head, [len(payload[s]) for s in order], order)
    out = SIGNATURE + head.getvalue() + b"".join(payload[s] for s in order)
    info = {
        "bytes": len(out),
        "width": header.width,
        "height": header.height,
        "channels": header.num_channels,
        "bit_depth": header.bit_depth,
        "effort": options.effort,
        "transforms": describe(specs),
        "tree": tree.describe(),
        "sections": layout.num_sections,
        "encode_seconds": time.perf_counter() - t0,
    }
    return out, info


def _section_payloads(num_sections, streams, syms, code, specs, tree):
    payload = [b""] * num_sections
    for (s, _, _), sym in zip(streams, syms):
        bw = BitWriter()
        if s == 0:
            write_chain(bw, specs)
            write_wp_params(bw, DEFAULT_WP)
            write_tree(bw, tree)
            write_entropy_code(bw, code)
        write_symbols(bw, code, sym)
        bw.align()
        body = bw.getvalue()
        payload[s] = body + zlib.crc32(body).to_bytes(CRC_BYTES, "little")
    return payload


class _LearnView:
    """Adapts encoder tiles to the sample gatherer (previous channels as PrevChannel)."""

    def __init__(self, tiles):
        self.tiles = tiles

    def __iter__(self):
        for t in self.tiles:
            yield _View(t.data, t.channel, t.stream, [p.pc for p in t.prev], t.nb, t.wp)


class _View:
    __slots__ = ("data", "channel", "stream", "prev", "nb", "wp")

    def __init__(self, data, channel, stream, prev, nb, wp):
        self.data, self.channel, self.stream = data, channel, stream
        self.prev, self.nb, self.wp = prev, nb, wp


# ---- decoder -----------------------------------------------------------------------

class Parsed:
    """Headers, TOC and section byte ranges of a (possibly partial) file."""

    def __init__(self, data):
        if len(data) < 2 or bytes(data[:2]) != SIGNATURE:
            raise CorruptStreamError("bad signature")
        self.data = data
        br = BitReader(data, 2)
        where = "image header"
        try:
            self.header = read_image_header(br)
            where = "frame header"
            self.frame = read_frame_header(br, self.header.xyb_encoded)
            br.align()
            self.header_bytes = br.pos >> 3
            hdr = self.header
            if hdr.width * hdr.height * hdr.num_channels > MAX_DECODE_SAMPLES:
                raise UnsupportedError("image too large for this decoder")
            gd = self.frame.group_dim
            groups = (-(-hdr.width // gd)) * (-(-hdr.height // gd))
            self.num_sections = 1 if groups == 1 else 1 + self.frame.num_passes * groups
            where = "TOC"
            self.lengths, self.perm = read_toc(br, self.num_sections)
        except (CorruptStreamError, ValueError) as e:
            # header problems are reported with the bit offset where parsing stopped
            cls = EndOfStreamError if isinstance(e, EndOfStreamError) else CorruptStreamError
            raise cls("%s: %s (file bit offset %d)" % (where, e, br.pos)) from None
        self.toc_end = br.pos >> 3
        order = self.perm or list(range(self.num_sections))
        self.order = order
        self.ranges = {}
        pos = self.toc_end
        for s, n in zip(order, self.lengths):
            self.ranges[s] = (pos, pos + n)
            pos += n
        self.total_length = pos

    def available(self):
        n = len(self.data)
        return {s for s, (a, b) in self.ranges.items() if b <= n}


class _Frame:
    """Decoding state after the global section."""

    def __init__(self, parsed):
        self.p = parsed
        hdr = parsed.header
        if 0 not in parsed.available():
            raise EndOfStreamError("global section is incomplete")
        start, end = _payload_range(parsed, 0)
        br = BitReader(parsed.data, start, end)
        try:
            self.specs = read_chain(br)
            self.plan = plan_chain(self.specs, [Shape(hdr.width, hdr.height)] * hdr.num_channels)
            self.wp_params = read_wp_params(br)
            self.tree = read_tree(br)
            self.code = read_entropy_code(br, self.tree.num_contexts)
        except CorruptStreamError as e:
            raise CorruptStreamError(str(e), section=0) from None
        self.layout = Layout(hdr.width, hdr.height, self.plan.shapes, self.plan.nb_meta,
                             parsed.frame.group_dim, parsed.frame.num_passes)
        if self.layout.num_sections != parsed.num_sections:
            raise CorruptStreamError("section count mismatch")
        self.global_reader = br
        used = [p for p in self.tree.used_properties() if p >= NUM_STATIC_PROPERTIES]
        self.num_prev = (max(used) - NUM_STATIC_PROPERTIES) // 4 + 1 if used else 0
        self.channels = [np.zeros((s.height, s.width), dtype=np.int64) for s in self.plan.shapes]
        self.decoded = set()

    def decode_section(self, s):
        tiles = self.layout.sections[s]
        try:
            if s == 0:
                br = self.global_reader
            else:
                start, end = self.p.ranges[s]
                if not tiles:
                    if end != start:
                        raise CorruptStreamError("empty section has payload")
                    return s, []
                br = BitReader(self.p.data, *_payload_range(self.p, s))
            width = max([t.width for t in tiles], default=1)
            reader = self.code.reader(br, width)
            out = []
            keys = [_tile_key(t, self.plan.shapes[t.channel]) for t in tiles]
            prev_lists = _prev_lists(keys) if self.num_prev else [[] for _ in tiles]
            pcs = []
            for t, prev in zip(tiles, prev_lists):
                pv = [pcs[i] for i in prev[:self.num_prev]]
                a = decode_channel(reader, self.tree, t.width, t.height, t.channel, s, pv,
                                   self.wp_params)
                pcs.append(PrevChannel(a) if self.num_prev else None)
                out.append((t, a))
            reader.finish()
            br.align()
            if br.bits_left:
                raise CorruptStreamError("section has trailing bytes")
        except CorruptStreamError as e:
            if e.section is not None:
                raise
            raise CorruptStreamError(str(e), section=s) from None
        except (ValueError, IndexError, OverflowError, KeyError) as e:
            raise CorruptStreamError("malformed data (%s)" % e, section=s) from None
        return s, out

    def decode(self, sections, threads=1):
        """Decode the given sections (the global one always) into the channel buffers."""
        results = [] if 0 in self.decoded else [self.decode_section(0)]
        rest = sorted(s for s in sections if s and s not in self.decoded)
        if threads > 1 and len(rest) > 1:
            with ThreadPoolExecutor(max_workers=threads) as ex:
                results += list(ex.map(self.decode_section, rest))
        else:
            results += [self.decode_section(s) for s in rest]
        for s, tiles in results:
            for t, a in tiles:
                self.channels[t.channel][t.y0:t.y1, t.x0:t.x1] = a
            self.decoded.add(s)

    def render(self, strict=True, local_only=False):
        """Undo the transforms; returns stored-orientation pixels (h, w, c)."""
        hdr = self.p.header
        chans = [Channel(a.copy(), s.hshift, s.vshift)
                 for a, s in zip(self.channels, self.plan.shapes)]
        try:
            undo_chain(chans, self.plan, hdr.bit_depth, local_only)
        except NonLocalPalette:
            raise
        except CorruptStreamError as e:
            raise CorruptStreamError("transform: %s" % e) from None
        except (ValueError, IndexError) as e:
            raise CorruptStreamError("transform: malformed data (%s)" % e) from None
        if len(chans) != hdr.num_channels or any(
                c.data.shape != (hdr.height, hdr.width) for c in chans):
            raise CorruptStreamError("decoded channels do not match the image header")
        planes = [c.data for c in chans]
        maxval = (1 << hdr.bit_depth) - 1
        if hdr.xyb_encoded:
            scales = self.p.frame.xyb_scales or DEFAULT_XYB_SCALES
            planes[:3] = xyb_ints_to_samples(planes[:3], hdr.bit_depth, scales)
        for k, pl in enumerate(planes):
            if pl.size and (pl.min() < 0 or pl.max() > maxval):
                if strict:
                    raise CorruptStreamError("channel %d has samples outside [0, %d]"
                                             % (k, maxval))
                planes[k] = np.clip(pl, 0, maxval)
        return np.stack(planes, axis=-1).astype(_dtype(hdr.bit_depth))


def _payload_range(parsed, s):
    """Byte range of section ``s`` without its CRC trailer, after checking the CRC."""
    start, end = parsed.ranges[s]
    if end - start < CRC_BYTES:
        raise CorruptStreamError("section shorter than its CRC", section=s)
    body = end - CRC_BYTES
    data = parsed.data
    if zlib.crc32(data[start:body]) != int.from_bytes(data[body:end], "little"):
        raise CorruptStreamError("CRC mismatch", section=s)
    return start, body


def _dtype(bit_depth):
    if bit_depth <= 8:
        return np.uint8
    if bit_depth <= 16:
        return np.uint16
    return np.uint32


def _check_complete(parsed):
    n = len(parsed.data)
    if parsed.total_length > n:
        missing = sorted(s for s, (a, b) in parsed.ranges.items() if b > n)
        raise EndOfStreamError("truncated file: missing sections %s" % missing)
    if parsed.total_length < n:
        raise CorruptStreamError("%d trailing bytes after the last section"
                                 % (n - parsed.total_length))


def _wrap(fn):
    """Map unexpected low-level failures on hostile input to CorruptStreamError."""
    try:
        return fn()
    except CodecError:
        raise
    except (ValueError, IndexError, OverflowError, KeyError, RecursionError) as e:
        raise CorruptStreamError("malformed stream (%s)" % e) from None


def decode_image(data, threads=1):
    """Decode a complete file to an (h, w, c) array in display orientation."""
    def run():
        parsed = Parsed(data)
        _check_complete(parsed)
        fr = _Frame(parsed)
        fr.decode(range(parsed.num_sections), threads)
        return orient(fr.render(), parsed.header.orientation)
    return _wrap(run)


def decode_roi(data, rect, threads=1, stats=None):
    """Decode only the rectangle ``(x, y, w, h)`` (display coordinates).

    ``stats``, when a dict, receives ``sections_decoded``.
    """
    def run():
        parsed = Parsed(data)
        _check_complete(parsed)
        hdr = parsed.header
        dw, dh = hdr.oriented_size()
        x, y, w, h = rect
        if w < 1 or h < 1 or x < 0 or y < 0 or x + w > dw or y + h > dh:
            raise InvalidRequestError("rectangle %s outside the %dx%d image" % (tuple(rect), dw, dh))
        x0, y0, x1, y1 = stored_rect(rect, hdr.orientation, hdr.width, hdr.height)
        fr = _Frame(parsed)
        widen = any(isinstance(s, Squeeze) for s in fr.specs)
        needed = fr.layout.sections_for_rect(x0, y0, x1, y1, widen)
        fr.decode(needed, threads)
        try:
            img = fr.render(local_only=True)
        except NonLocalPalette:
            fr.decode(set(range(parsed.num_sections)) - fr.decoded, threads)
            img = fr.render()
        if stats is not None:
            stats["sections_decoded"] = sorted(fr.decoded)
        crop = img[y0:y1, x0:x1]
        return np.ascontiguousarray(orient(crop, hdr.orientation))
    return _wrap(run)


def decode_progressive(data, threads=1):
    """Decode whatever complete sections a prefix holds; missing samples read as zero.

    Returns ``(pixels, report)``.
    """
    def run():
        parsed = Parsed(data)
        avail = parsed.available()
        fr = _Frame(parsed)
        fr.decode(avail, threads)
        complete = len(avail) == parsed.num_sections
        if complete:
            _check_complete(parsed)
        img = orient(fr.render(strict=complete), parsed.header.orientation)
        lay = fr.layout
        passes = {}
        for s in sorted(avail - {0}):
            p, g = lay.section_info(s)
            passes.setdefault(p, []).append(g)
        report = {
            "complete": complete,
            "sections_total": parsed.num_sections,
            "sections_available": sorted(avail),
            "sections_missing": sorted(set(range(parsed.num_sections)) - avail),
            "groups_by_pass": passes,
        }
        return img, report
    return _wrap(run)


def inspect_stream(data):
    """Header, TOC, transform and tree summary of a file as a dict."""
    def run():
        parsed = Parsed(data)
        fr = _Frame(parsed)
        hdr, frame = parsed.header, parsed.frame
        perm = parsed.perm
        return {
            "header": {
                "width": hdr.width, "height": hdr.height, "bit_depth": hdr.bit_depth,
                "color_channels": hdr.num_color_channels,
                "extra_channels": hdr.num_extra_channels,
                "orientation": hdr.orientation, "xyb": hdr.xyb_encoded,
            },
            "frame": {"group_dim": frame.group_dim, "passes": frame.num_passes,
                      "xyb_scales": list(frame.xyb_scales) if frame.xyb_scales else None},
            "header_bytes": parsed.toc_end,
            "toc": {
                "lengths": list(parsed.lengths),
                "permutation": list(perm) if perm else None,
                "total": sum(parsed.lengths),
            },
            "transforms": describe(fr.specs),
            "palette": any(isinstance(s, Palette) for s in fr.specs),
            "tree": fr.tree.describe(),
            "channels": [list(s) for s in fr.plan.shapes],
            "section_sizes": {s: b - a for s, (a, b) in sorted(parsed.ranges.items())},
            "file_bytes": len(data),
        }
    return _wrap(run)
