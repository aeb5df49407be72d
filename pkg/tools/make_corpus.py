"""Regenerate tests/corpus: small test images plus manifest.json.

Photographic crops come from the sample images bundled with scikit-image;
everything else is synthesized from a fixed seed.  For the photographic
crops the manifest also records the size of the same pixels saved by
Pillow with its default PNG settings (the stored-PNG baseline).

    python3 tools/make_corpus.py [outdir]

Needs scikit-image and Pillow, which the codec itself does not use.
"""

import io
import json
import os
import sys

import numpy as np
from PIL import Image
from skimage import data as skdata
from skimage.color import rgb2gray

from modcodec.imageio import write_image

PHOTO = 48
rng = np.random.default_rng(2024)


def crop(img, y, x, size=PHOTO):
    out = np.ascontiguousarray(img[y:y + size, x:x + size])
    assert out.shape[:2] == (size, size), (img.shape, y, x)
    return out


def to_gray8(rgb):
    return (rgb2gray(rgb) * 255 + 0.5).astype(np.uint8)


def png_baseline(pixels):
    mode = {1: "L", 2: "LA", 3: "RGB", 4: "RGBA"}[pixels.shape[2]]
    buf = io.BytesIO()
    Image.fromarray(pixels if pixels.shape[2] > 1 else pixels[:, :, 0], mode).save(buf, "PNG")
    return len(buf.getvalue())


def photos():
    src = {
        "astronaut": skdata.astronaut(), "chelsea": skdata.chelsea(),
        "coffee": skdata.coffee(), "motorcycle": skdata.stereo_motorcycle()[0],
        "rocket": skdata.rocket(), "retina": skdata.retina(),
        "hubble": skdata.hubble_deep_field(), "ihc": skdata.immunohistochemistry(),
    }
    rgb_crops = [
        ("astronaut", 60, 180), ("astronaut", 300, 330), ("chelsea", 90, 130),
        ("chelsea", 180, 300), ("coffee", 120, 240), ("coffee", 260, 420),
        ("motorcycle", 200, 300), ("motorcycle", 420, 600), ("rocket", 150, 250),
        ("rocket", 300, 80), ("retina", 600, 700), ("retina", 900, 1100),
        ("hubble", 400, 500), ("ihc", 200, 300),
    ]
    for k, (name, y, x) in enumerate(rgb_crops):
        yield "photo_%02d_%s.png" % (k, name), crop(src[name], y, x), "photo"
    gray = {
        "camera": skdata.camera(), "moon": skdata.moon(), "coins": skdata.coins(),
        "brick": skdata.brick(), "grass": skdata.grass(), "gravel": skdata.gravel(),
    }
    for k, (name, img) in enumerate(gray.items()):
        h, w = img.shape
        yield ("photo_g%d_%s.png" % (k, name), crop(img, h // 3, w // 3)[:, :, None], "photo")
    # photos with a synthetic soft alpha mask
    yy, xx = np.mgrid[0:PHOTO, 0:PHOTO]
    mask = np.clip(255 - 6 * np.hypot(yy - 24, xx - 24), 0, 255).astype(np.uint8)
    for k, (name, y, x) in enumerate([("astronaut", 20, 200), ("coffee", 40, 60)]):
        rgba = np.dstack([crop(src[name], y, x), mask])
        yield "photo_a%d_%s.png" % (k, name), rgba, "photo"


def _glyphs(canvas, y, x, n, color, scale=1):
    for i in range(n):
        pattern = rng.integers(0, 2, (5, 3)).astype(bool)
        pattern = np.kron(pattern, np.ones((scale, scale), bool))
        gy, gx = y, x + i * (4 * scale)
        h, w = pattern.shape
        if gx + w > canvas.shape[1] or gy + h > canvas.shape[0]:
            break
        canvas[gy:gy + h, gx:gx + w][pattern] = color


def screenshot(h, w, theme):
    bg, bar, fg, accent = theme
    img = np.empty((h, w, 3), np.uint8)
    img[:] = bg
    img[:7] = bar
    _glyphs(img, 1, 2, w // 5, fg)
    for row in range(10, h - 6, 8):
        _glyphs(img, row, 3, int(rng.integers(2, max(3, w // 4))), fg)
    img[h - 8:h - 2, w - 16:w - 3] = accent
    return img


def screenshots():
    themes = [((240, 240, 240), (40, 80, 160), (20, 20, 20), (220, 60, 60)),
              ((30, 30, 34), (60, 60, 70), (200, 200, 200), (90, 200, 120)),
              ((255, 255, 255), (200, 200, 200), (0, 0, 0), (0, 120, 215))]
    shapes = [(40, 64), (48, 48), (24, 80), (64, 40), (36, 56), (52, 44)]
    for k, (h, w) in enumerate(shapes):
        yield "screen_%02d.png" % k, screenshot(h, w, themes[k % 3]), "screenshot"
    page = skdata.page()
    yield "screen_page.png", crop(page, 40, 100, 56)[:, :, None], "screenshot"
    text = skdata.text()
    yield "screen_text.png", crop(text, 60, 200, 48)[:, :, None], "screenshot"


def floyd_steinberg(gray, levels):
    a = gray.astype(np.float64) / 255 * (levels - 1)
    h, w = a.shape
    out = np.zeros((h, w), np.int64)
    for y in range(h):
        for x in range(w):
            q = int(np.clip(np.round(a[y, x]), 0, levels - 1))
            e = a[y, x] - q
            out[y, x] = q
            if x + 1 < w:
                a[y, x + 1] += e * 7 / 16
            if y + 1 < h:
                if x:
                    a[y + 1, x - 1] += e * 3 / 16
                a[y + 1, x] += e * 5 / 16
                if x + 1 < w:
                    a[y + 1, x + 1] += e / 16
    return out


BAYER4 = np.array([[0, 8, 2, 10], [12, 4, 14, 6], [3, 11, 1, 9], [15, 7, 13, 5]]) / 16.0


def ordered(rgb, levels):
    h, w = rgb.shape[:2]
    t = np.tile(BAYER4, (h // 4 + 1, w // 4 + 1))[:h, :w, None]
    v = rgb / 255.0 * (levels - 1)
    return np.clip(np.floor(v + t), 0, levels - 1).astype(np.int64)


def dithered():
    cam = crop(skdata.camera(), 100, 200, 40)
    ast = crop(skdata.astronaut(), 100, 150, 40)
    yield "dither_fs_1bit.png", floyd_steinberg(cam, 2)[:, :, None], "dithered", 1
    yield "dither_fs_2bit.png", floyd_steinberg(cam, 4)[:, :, None], "dithered", 2
    yield "dither_fs_4bit.png", floyd_steinberg(to_gray8(ast), 16)[:, :, None], "dithered", 4
    yield "dither_bayer_rgb8.png", (ordered(ast, 2) * 255).astype(np.uint8), "dithered", 8
    yield "dither_bayer_rgb64.png", (ordered(ast, 4) * 85).astype(np.uint8), "dithered", 8
    pal = ordered(crop(skdata.coffee(), 200, 200, 40), 3) * 127
    yield "dither_bayer_coffee.png", pal.astype(np.uint8), "dithered", 8


def noise():
    yield "noise_rgb8.png", rng.integers(0, 256, (24, 24, 3)), "noise", 8
    yield "noise_gray16.pam", rng.integers(0, 65536, (24, 24, 1)), "noise", 16
    yield "noise_1bit.png", rng.integers(0, 2, (32, 32, 1)), "noise", 1
    yield "noise_rgb12.pam", rng.integers(0, 4096, (16, 16, 3)), "noise", 12
    yield "noise_rgba8.png", rng.integers(0, 256, (20, 20, 4)), "noise", 8
    g = np.clip(np.round(rng.normal(512, 60, (24, 24, 1))), 0, 1023)
    yield "noise_gauss10.png", g, "noise", 10


def depths():
    yy, xx = np.mgrid[0:32, 0:32]
    grad = (xx + yy) / 62.0
    wobble = rng.integers(-1, 2, (32, 32))

    def scaled(bits):
        m = (1 << bits) - 1
        return np.clip(np.round(grad * m) + wobble, 0, m)[:, :, None]

    yield "depth_gray3.png", scaled(3), "synthetic", 3
    yield "depth_gray5.png", scaled(5), "synthetic", 5
    yield "depth_gray14.pam", scaled(14), "synthetic", 14
    # the remaining depths, so every depth from 1 to 16 appears at least once
    for bits in (6, 7, 9, 11, 13, 15):
        ext = "png" if bits < 9 else "pam"
        yield "depth_gray%d.%s" % (bits, ext), scaled(bits)[::2, ::2], "synthetic", bits
    rgb16 = np.concatenate([scaled(16), scaled(16)[::-1], scaled(16)[:, ::-1]], axis=2)
    yield "depth_rgb16.png", rgb16, "synthetic", 16
    rgba16 = np.concatenate([rgb16, scaled(16).transpose(1, 0, 2)], axis=2)
    yield "depth_rgba16.pam", rgba16, "synthetic", 16
    la = np.dstack([crop(skdata.camera(), 300, 300, 32), (xx * 8).astype(np.uint8)])
    yield "depth_gray_alpha8.png", la, "photo-derived", 8


def edges():
    yield "edge_1x1.png", np.array([[[12, 200, 7]]]), "synthetic", 8
    yield "edge_row_37.png", rng.integers(0, 256, (1, 37, 1)), "synthetic", 8
    yield "edge_col_41.png", rng.integers(0, 256, (41, 1, 3)), "synthetic", 8
    strip = (np.arange(260)[None, :] // 3 + rng.integers(0, 4, (3, 260))) % 256
    yield "edge_strip_260x3.png", strip[:, :, None], "synthetic", 8
    tall = np.stack([(np.arange(300)[:, None] + 40 * c + rng.integers(0, 3, (300, 3))) % 256
                     for c in range(3)], axis=2)
    yield "edge_strip_3x300.png", tall, "synthetic", 8


def multi_group():
    yy, xx = np.mgrid[0:140, 0:150]
    smooth = 128 + 60 * np.sin(xx / 13.0) * np.cos(yy / 17.0) + rng.normal(0, 2, (140, 150))
    yield "multi_gray_150x140.png", np.clip(np.round(smooth), 0, 255)[:, :, None], "synthetic", 8
    yield "multi_screen_136x136.png", screenshot(136, 136, ((250, 250, 250), (50, 50, 140),
                                                            (10, 10, 10), (0, 160, 80))), \
        "screenshot", 8
    strip = np.ascontiguousarray(skdata.astronaut()[200:224, 100:372])
    yield "multi_photo_272x24.png", strip, "photo-strip", 8


def main(outdir):
    os.makedirs(outdir, exist_ok=True)
    entries = []

    def add(name, pixels, kind, bits=8):
        a = np.asarray(pixels)
        if a.ndim == 2:
            a = a[:, :, None]
        a = a.astype(np.uint8 if bits <= 8 else np.uint16)
        write_image(os.path.join(outdir, name), a, bits)
        e = {"file": name, "kind": kind, "width": a.shape[1], "height": a.shape[0],
             "channels": a.shape[2], "bit_depth": bits}
        if kind == "photo":
            e["png_bytes"] = png_baseline(a)
        entries.append(e)

    for name, a, kind in photos():
        add(name, a, kind)
    for name, a, kind in screenshots():
        add(name, a, kind)
    for gen in (dithered, noise, depths, edges, multi_group):
        for name, a, kind, bits in gen():
            add(name, a, kind, bits)
    manifest = {
        "description": "modcodec test corpus, regenerate with tools/make_corpus.py",
        "png_baseline": "Pillow %s, default PNG settings (zlib level 6)" % Image.__version__,
        "images": entries,
    }
    with open(os.path.join(outdir, "manifest.json"), "w") as f:
        json.dump(manifest, f, indent=1)
    print("%d images written to %s" % (len(entries), outdir))


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else os.path.join(os.path.dirname(__file__), "..",
                                                             "tests", "corpus"))
