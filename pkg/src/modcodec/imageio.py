"""Reading and writing PNG (via pypng) and PNM/PAM images.

Images are ``(height, width, channels)`` integer arrays together with the
bit depth of their samples.  Only integer samples up to 16 bits can be
stored in these formats.
"""

import io
import logging
import os

import numpy as np
import png

from .errors import UnsupportedError

log = logging.getLogger(__name__)

PNM_MAGIC = {b"P5": 1, b"P6": 3, b"P7": None}
PAM_TUPLTYPES = {1: "GRAYSCALE", 2: "GRAYSCALE_ALPHA", 3: "RGB", 4: "RGB_ALPHA"}


def read_image(path):
    """Return ``(pixels, bit_depth)`` for a PNG, PGM/PPM or PAM file."""
    with open(path, "rb") as f:
        data = f.read()
    if data[:8] == b"\x89PNG\r\n\x1a\n":
        return decode_png(data)
    if data[:2] in PNM_MAGIC:
        return decode_pnm(data)
    raise UnsupportedError("%s: not a PNG, PNM or PAM file" % path)


def write_image(path, pixels, bit_depth):
    """Write ``pixels`` to ``path``; the extension picks the format (.png, .pgm/.ppm, .pam)."""
    ext = os.path.splitext(path)[1].lower()
    if ext == ".png":
        data = encode_png(pixels, bit_depth)
    elif ext in (".pgm", ".ppm", ".pnm", ".pam"):
        data = encode_pnm(pixels, bit_depth, pam=ext == ".pam")
    else:
        raise UnsupportedError("unknown output extension %r (use .png, .pgm, .ppm or .pam)" % ext)
    with open(path, "wb") as f:
        f.write(data)


# ---- PNG ---------------------------------------------------------------------------

def decode_png(data):
    try:
        for kind, _ in png.Reader(bytes=data).chunks():
            if kind == b"iCCP":
                # color management is out of scope; samples are taken as they are
                log.warning("ICC profile ignored; samples are treated as sRGB")
                break
        w, h, rows, info = png.Reader(bytes=data).asDirect()
        planes = info["planes"]
        a = np.array([np.asarray(r) for r in rows], dtype=np.int64).reshape(h, w, planes)
    except png.Error as e:
        raise UnsupportedError("unreadable PNG: %s" % e) from None
    bits = info["bitdepth"]
    return a.astype(np.uint8 if bits <= 8 else np.uint16), bits


def encode_png(pixels, bit_depth):
    a = _as_hwc(pixels)
    h, w, c = a.shape
    if c > 4:
        raise UnsupportedError("PNG holds at most 4 channels, image has %d" % c)
    if bit_depth > 16:
        raise UnsupportedError("PNG holds at most 16-bit samples")
    out = io.BytesIO()
    # pypng writes an sBIT chunk for depths other than 1/2/4/8/16
    writer = png.Writer(w, h, greyscale=c < 3, alpha=c in (2, 4), bitdepth=bit_depth)
    writer.write(out, a.reshape(h, w * c).tolist())
    return out.getvalue()


# ---- PNM / PAM ---------------------------------------------------------------------

def _tokens(data, pos, count):
    """Read ``count`` whitespace-separated header tokens (with # comments) from ``pos``."""
    out = []
    n = len(data)
    while len(out) < count:
        while pos < n and data[pos:pos + 1].isspace():
            pos += 1
        if pos < n and data[pos:pos + 1] == b"#":
            while pos < n and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < n and not data[pos:pos + 1].isspace():
            pos += 1
        if start == pos:
            raise UnsupportedError("truncated PNM header")
        out.append(data[start:pos])
    return out, pos + 1        # a single whitespace byte ends the header


def _pam_header(data):
    fields = {}
    pos = 3
    while True:
        end = data.find(b"\n", pos)
        if end < 0:
            raise UnsupportedError("truncated PAM header")
        line = data[pos:end].strip()
        pos = end + 1
        if not line or line.startswith(b"#"):
            continue
        if line == b"ENDHDR":
            return fields, pos
        key, _, value = line.partition(b" ")
        fields[key.decode()] = value.strip().decode()


def decode_pnm(data):
    magic = data[:2]
    if magic == b"P7":
        fields, pos = _pam_header(data)
        try:
            w, h = int(fields["WIDTH"]), int(fields["HEIGHT"])
            c, maxval = int(fields["DEPTH"]), int(fields["MAXVAL"])
        except (KeyError, ValueError):
            raise UnsupportedError("PAM header lacks WIDTH/HEIGHT/DEPTH/MAXVAL") from None
    else:
        c = PNM_MAGIC[magic]
        (w, h, maxval), pos = _tokens(data, 2, 3)
        w, h, maxval = int(w), int(h), int(maxval)
    if not 1 <= maxval <= 65535 or w < 1 or h < 1 or c < 1:
        raise UnsupportedError("unsupported PNM geometry or maxval")
    dt = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
    n = w * h * c
    body = data[pos:pos + n * dt.itemsize]
    if len(body) < n * dt.itemsize:
        raise UnsupportedError("truncated PNM pixel data")
    a = np.frombuffer(body, dtype=dt).reshape(h, w, c)
    if a.max(initial=0) > maxval:
        raise UnsupportedError("PNM sample above maxval")
    bits = maxval.bit_length()
    return a.astype(np.uint8 if bits <= 8 else np.uint16), bits


def encode_pnm(pixels, bit_depth, pam=False):
    a = _as_hwc(pixels)
    h, w, c = a.shape
    if bit_depth > 16:
        raise UnsupportedError("PNM holds at most 16-bit samples")
    maxval = (1 << bit_depth) - 1
    if pam:
        head = "P7\nWIDTH %d\nHEIGHT %d\nDEPTH %d\nMAXVAL %d\n" % (w, h, c, maxval)
        if c in PAM_TUPLTYPES:
            head += "TUPLTYPE %s\n" % PAM_TUPLTYPES[c]
        head += "ENDHDR\n"
    else:
        if c not in (1, 3):
            raise UnsupportedError("PGM/PPM need 1 or 3 channels; use .pam")
        head = "%s\n%d %d\n%d\n" % ("P5" if c == 1 else "P6", w, h, maxval)
    dt = ">u2" if maxval > 255 else "u1"
    return head.encode() + a.astype(dt).tobytes()


def _as_hwc(pixels):
    a = np.asarray(pixels)
    if a.ndim == 2:
        a = a[:, :, None]
    if a.ndim != 3:
        raise UnsupportedError("pixels must be (height, width[, channels])")
    return a
