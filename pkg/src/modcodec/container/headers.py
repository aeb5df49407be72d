"""Image and frame headers, including the compact size header."""

from dataclasses import dataclass
from typing import Optional, Tuple

from ..color import DEFAULT_XYB_SCALES
from ..errors import CorruptStreamError, UnsupportedError

SIGNATURE = b"\x4a\x58"
FORMAT_VERSION = 1
MAX_DIM = 1 << 30
MAX_BIT_DEPTH = 31
MAX_EXTRA_CHANNELS = 4096

# width:height ratios selectable by the 3-bit selector (0 = explicit width)
RATIOS = ((1, 1), (6, 5), (4, 3), (3, 2), (16, 9), (5, 4), (2, 1))

_DIM = ((1, 9), (1, 13), (1, 18), (1, 30))
_BIT_DEPTH = ((8, 0), (16, 0), (1, 4), (1, 5))
_EXTRA = ((0, 0), (1, 0), (2, 4), (1, 12))
_SCALE = ((4096, 0), (1024, 0), (1, 16), (1, 24))

ORIENTATIONS = (
    "identity", "flip horizontally", "rotate 180", "flip vertically",
    "transpose", "rotate 90 clockwise", "anti-transpose", "rotate 90 counter-clockwise",
)


def _small(v):
    return v % 8 == 0 and 8 <= v <= 256


def _ratio_for(w, h):
    for i, (a, b) in enumerate(RATIOS, 1):
        if h * a % b == 0 and h * a // b == w:
            return i
    return 0


def write_size_header(bw, w, h):
    if not (1 <= w <= MAX_DIM and 1 <= h <= MAX_DIM):
        raise ValueError("image dimensions must be in [1, 2^30]")
    ratio = _ratio_for(w, h)
    small = _small(h) and (ratio or _small(w))
    bw.write_bool(small)
    if small:
        bw.write(5, h // 8 - 1)
    else:
        bw.write_u32(h, *_DIM)
    bw.write(3, ratio)
    if ratio == 0:
        if small:
            bw.write(5, w // 8 - 1)
        else:
            bw.write_u32(w, *_DIM)


def read_size_header(br):
    small = br.read_bool()
    h = (br.read(5) + 1) * 8 if small else br.read_u32(*_DIM)
    ratio = br.read(3)
    if ratio:
        a, b = RATIOS[ratio - 1]
        w = h * a // b
    elif small:
        w = (br.read(5) + 1) * 8
    else:
        w = br.read_u32(*_DIM)
    if not (1 <= w <= MAX_DIM and 1 <= h <= MAX_DIM):
        raise CorruptStreamError("image dimensions out of range")
    return w, h


@dataclass
class ImageHeader:
    width: int
    height: int
    bit_depth: int = 8
    num_color_channels: int = 3
    num_extra_channels: int = 0
    orientation: int = 1
    xyb_encoded: bool = False

    @property
    def num_channels(self):
        return self.num_color_channels + self.num_extra_channels

    def validate(self):
        if not (1 <= self.width <= MAX_DIM and 1 <= self.height <= MAX_DIM):
            raise ValueError("image dimensions must be in [1, 2^30]")
        if not 1 <= self.bit_depth <= MAX_BIT_DEPTH:
            raise ValueError("bit depth must be in [1, 31]")
        if self.num_color_channels not in (1, 3):
            raise ValueError("color channel count must be 1 or 3")
        if not 0 <= self.num_extra_channels <= MAX_EXTRA_CHANNELS:
            raise ValueError("too many extra channels")
        if not 1 <= self.orientation <= 8:
            raise ValueError("orientation must be in [1, 8]")
        if self.xyb_encoded and self.num_color_channels != 3:
            raise ValueError("XYB needs three color channels")

    def oriented_size(self):
        """(width, height) of the image as displayed."""
        if self.orientation >= 5:
            return self.height, self.width
        return self.width, self.height


def write_image_header(bw, hdr):
    hdr.validate()
    bw.write(4, FORMAT_VERSION)
    write_size_header(bw, hdr.width, hdr.height)
    bw.write(3, hdr.orientation - 1)
    bw.write_u32(hdr.bit_depth, *_BIT_DEPTH)
    bw.write_bool(hdr.num_color_channels == 3)
    bw.write_u32(hdr.num_extra_channels, *_EXTRA)
    bw.write_bool(hdr.xyb_encoded)


def read_image_header(br):
    version = br.read(4)
    if version != FORMAT_VERSION:
        raise UnsupportedError("unsupported format version %d" % version)
    w, h = read_size_header(br)
    orientation = br.read(3) + 1
    depth = br.read_u32(*_BIT_DEPTH)
    if not 1 <= depth <= MAX_BIT_DEPTH:
        raise CorruptStreamError("bit depth out of range")
    ncolor = 3 if br.read_bool() else 1
    extra = br.read_u32(*_EXTRA)
    xyb = br.read_bool()
    if xyb and ncolor != 3:
        raise CorruptStreamError("XYB flag on a grayscale image")
    return ImageHeader(w, h, depth, ncolor, extra, orientation, xyb)


@dataclass
class FrameHeader:
    group_size_shift: int = 1
    num_passes: int = 1
    xyb_scales: Optional[Tuple[int, int, int]] = None   # (Y, X, B') when XYB

    @property
    def group_dim(self):
        return 128 << self.group_size_shift


def write_frame_header(bw, fh, xyb):
    if not 0 <= fh.group_size_shift <= 3 or fh.num_passes not in (1, 2):
        raise ValueError("invalid frame header")
    bw.write(2, fh.group_size_shift)
    bw.write(1, fh.num_passes - 1)
    if xyb:
        for s in fh.xyb_scales or DEFAULT_XYB_SCALES:
            if not 1 <= s < 1 << 24:
                raise ValueError("XYB scale out of range")
            bw.write_u32(s, *_SCALE)


def read_frame_header(br, xyb):
    fh = FrameHeader(br.read(2), br.read(1) + 1)
    if xyb:
        scales = tuple(br.read_u32(*_SCALE) for _ in range(3))
        if 0 in scales:
            raise CorruptStreamError("zero XYB scale")
        fh.xyb_scales = scales
    return fh
