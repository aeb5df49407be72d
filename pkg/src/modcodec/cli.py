"""Command line tool: ``modcodec encode|decode|roi|inspect|bench``.

Stats go to standard output as one JSON line per command (bench prints a
tab-separated table instead); diagnostics go to standard error.  The exit
status is 0 only when the command fully succeeded.
"""

import argparse
import json
import logging
import os
import statistics
import sys
import time

import numpy as np

from .container.codec import (
    GROUP_SIZES,
    Parsed,
    decode_image,
    decode_progressive,
    decode_roi,
    encode_with_info,
    inspect_stream,
)
from .errors import CodecError
from .imageio import encode_png, read_image, write_image

log = logging.getLogger("modcodec")

IMAGE_EXTS = (".png", ".pgm", ".ppm", ".pnm", ".pam")


class UsageError(Exception):
    pass


def _int_list(text, n=None, name="value"):
    try:
        vals = [int(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError("%s must be comma-separated integers" % name) from None
    if n is not None and len(vals) != n:
        raise argparse.ArgumentTypeError("%s needs %d comma-separated integers" % (name, n))
    return vals


def _rect(text):
    vals = _int_list(text, 4, "--rect")
    if vals[2] < 1 or vals[3] < 1 or vals[0] < 0 or vals[1] < 0:
        raise argparse.ArgumentTypeError("--rect needs x,y >= 0 and w,h >= 1")
    return tuple(vals)


def _scales(text):
    vals = _int_list(text, 3, "--lossy-xyb")
    if min(vals) < 1:
        raise argparse.ArgumentTypeError("--lossy-xyb scales must be positive")
    return tuple(vals)


def _efforts(text):
    vals = _int_list(text, None, "--efforts")
    if any(not 1 <= e <= 9 for e in vals):
        raise argparse.ArgumentTypeError("efforts must be in 1..9")
    return vals


def _effort(text):
    e = int(text)
    if not 1 <= e <= 9:
        raise argparse.ArgumentTypeError("effort must be in 1..9")
    return e


def _positive(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def build_parser():
    # allow_abbrev=False: a misspelt or shortened flag is an error, never a guess
    p = argparse.ArgumentParser(prog="modcodec", allow_abbrev=False,
                                description="Lossless modular image codec.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--threads", type=_positive, default=os.cpu_count() or 1,
                        help="worker threads for section decoding (default: all cores)")
        sp.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")

    enc = sub.add_parser("encode", allow_abbrev=False, help="image file -> container")
    enc.add_argument("input")
    enc.add_argument("output")
    enc.add_argument("-e", "--effort", type=_effort, default=7)
    enc.add_argument("--group-size", type=int, choices=GROUP_SIZES, default=256)
    enc.add_argument("--progressive", action="store_true",
                     help="Squeeze pyramid with a two-pass section layout")
    enc.add_argument("--lossy-xyb", type=_scales, metavar="Y,X,B",
                     help="lossy mode: XYB with these integer quantization scales")
    enc.add_argument("--permutation", choices=("none", "center-first"), default="none")
    common(enc)

    dec = sub.add_parser("decode", allow_abbrev=False, help="container -> image file")
    dec.add_argument("input")
    dec.add_argument("output")
    dec.add_argument("--rect", type=_rect, metavar="X,Y,W,H", help="decode only this region")
    dec.add_argument("--prefix-bytes", type=int, metavar="N",
                     help="decode a preview from the first N bytes only")
    common(dec)

    roi = sub.add_parser("roi", allow_abbrev=False, help="decode one region")
    roi.add_argument("input")
    roi.add_argument("output")
    roi.add_argument("--rect", type=_rect, metavar="X,Y,W,H", required=True)
    common(roi)

    ins = sub.add_parser("inspect", allow_abbrev=False, help="dump headers, TOC and tree")
    ins.add_argument("input")
    ins.add_argument("--json", action="store_true", help="print the dump as one JSON line")
    common(ins)

    bench = sub.add_parser("bench", allow_abbrev=False, help="benchmark a directory of images")
    bench.add_argument("corpus")
    bench.add_argument("--efforts", type=_efforts, default=[1, 4, 7, 9], metavar="E,E,...")
    bench.add_argument("--group-size", type=int, choices=GROUP_SIZES, default=256)
    bench.add_argument("--progressive", action="store_true")
    bench.add_argument("--out", default="bench.json", help="structured results file")
    common(bench)
    return p


def _emit(record):
    sys.stdout.write(json.dumps(record, sort_keys=True) + "\n")
    sys.stdout.flush()


def _read_bytes(path):
    with open(path, "rb") as f:
        return f.read()


def cmd_encode(args):
    pixels, bits = read_image(args.input)
    t0 = time.perf_counter()
    data, info = encode_with_info(pixels, effort=args.effort, group_size=args.group_size,
                                  progressive=args.progressive, permutation=args.permutation,
                                  lossy_xyb=args.lossy_xyb, bit_depth=bits)
    wall = time.perf_counter() - t0
    with open(args.output, "wb") as f:
        f.write(data)
    h, w = pixels.shape[:2]
    _emit({
        "command": "encode", "input": args.input, "output": args.output,
        "bytes": len(data), "bpp": 8.0 * len(data) / (w * h),
        "width": w, "height": h, "channels": info["channels"], "bit_depth": bits,
        "effort": args.effort, "progressive": args.progressive,
        "lossy": args.lossy_xyb is not None, "permutation": args.permutation,
        "transforms": info["transforms"], "tree_leaves": info["tree"]["leaves"],
        "sections": info["sections"], "wall_seconds": round(wall, 4),
    })
    return 0


def cmd_decode(args):
    data = _read_bytes(args.input)
    rect = getattr(args, "rect", None)
    prefix = getattr(args, "prefix_bytes", None)
    if rect is not None and prefix is not None:
        raise UsageError("--rect and --prefix-bytes cannot be combined")
    t0 = time.perf_counter()
    record = {"command": args.command, "input": args.input, "output": args.output,
              "bytes_in": len(data)}
    if prefix is not None:
        if prefix < 0:
            raise UsageError("--prefix-bytes must be >= 0")
        img, report = decode_progressive(data[:prefix], threads=args.threads)
        record.update({"prefix_bytes": min(prefix, len(data)), "complete": report["complete"],
                       "sections_available": report["sections_available"],
                       "sections_missing": report["sections_missing"]})
    elif rect is not None:
        stats = {}
        img = decode_roi(data, rect, threads=args.threads, stats=stats)
        record.update({"rect": list(rect), "sections_decoded": stats["sections_decoded"]})
    else:
        img = decode_image(data, threads=args.threads)
    wall = time.perf_counter() - t0
    bits = Parsed(data).header.bit_depth
    write_image(args.output, img, bits)
    record.update({"width": img.shape[1], "height": img.shape[0], "channels": img.shape[2],
                   "bit_depth": bits, "wall_seconds": round(wall, 4)})
    _emit(record)
    return 0


def format_inspect(d):
    """Human-readable dump of :func:`inspect_stream` output."""
    hdr, fr, toc, tree = d["header"], d["frame"], d["toc"], d["tree"]
    lines = [
        "size: %dx%d" % (hdr["width"], hdr["height"]),
        "bit_depth: %d" % hdr["bit_depth"],
        "channels: %d color + %d extra" % (hdr["color_channels"], hdr["extra_channels"]),
        "orientation: %d" % hdr["orientation"],
        "xyb: %s" % ("yes, scales %s" % fr["xyb_scales"] if hdr["xyb"] else "no"),
        "group_dim: %d" % fr["group_dim"],
        "passes: %d" % fr["passes"],
        "header_bytes: %d" % d["header_bytes"],
        "sections: %d" % len(toc["lengths"]),
        "toc_lengths: %s" % " ".join(map(str, toc["lengths"])),
        "toc_total: %d" % toc["total"],
        "permutation: %s" % ("none" if toc["permutation"] is None
                             else " ".join(map(str, toc["permutation"]))),
        "transforms: %s" % (", ".join(d["transforms"]) or "none"),
        "tree: %d nodes, %d leaves, depth %d" % (tree["nodes"], tree["leaves"], tree["depth"]),
        "predictor_usage: %s" % " ".join("%s=%d" % kv for kv in tree["predictors"].items()),
        "coded_channels: %s" % " ".join("%dx%d" % (c[0], c[1]) for c in d["channels"]),
        "section_bytes: %s" % " ".join("%s:%d" % kv for kv in d["section_sizes"].items()),
        "file_bytes: %d" % d["file_bytes"],
    ]
    return "\n".join(lines)


def cmd_inspect(args):
    d = inspect_stream(_read_bytes(args.input))
    if args.json:
        _emit(d)
    else:
        sys.stdout.write(format_inspect(d) + "\n")
    return 0


def _baseline_sizes(corpus):
    path = os.path.join(corpus, "manifest.json")
    if not os.path.exists(path):
        return {}
    with open(path) as f:
        manifest = json.load(f)
    return {e["file"]: e["png_bytes"] for e in manifest.get("images", []) if "png_bytes" in e}


def cmd_bench(args):
    files = sorted(f for f in os.listdir(args.corpus) if f.lower().endswith(IMAGE_EXTS))
    if not files:
        raise UsageError("no images in %s" % args.corpus)
    baselines = _baseline_sizes(args.corpus)
    per_image = []
    failures = 0
    for name in files:
        path = os.path.join(args.corpus, name)
        try:
            pixels, bits = read_image(path)
        except (CodecError, OSError) as e:
            log.warning("skipping %s: %s", name, e)
            continue
        h, w = pixels.shape[:2]
        png_bytes = baselines.get(name)
        if png_bytes is None:
            png_bytes = os.path.getsize(path) if name.lower().endswith(".png") \
                else len(encode_png(pixels, bits))
        row = {"file": name, "width": w, "height": h, "channels": pixels.shape[2],
               "bit_depth": bits, "raw_bytes": w * h * pixels.shape[2] * ((bits + 7) // 8),
               "png_bytes": png_bytes, "efforts": {}}
        for e in args.efforts:
            t0 = time.perf_counter()
            data, _ = encode_with_info(pixels, effort=e, group_size=args.group_size,
                                       progressive=args.progressive, bit_depth=bits)
            t1 = time.perf_counter()
            out = decode_image(data, threads=args.threads)
            t2 = time.perf_counter()
            ok = np.array_equal(out, pixels)
            if not ok:
                failures += 1
                log.error("%s effort %d: round trip mismatch", name, e)
            row["efforts"][e] = {"bytes": len(data), "encode_seconds": t1 - t0,
                                 "decode_seconds": t2 - t1, "round_trip": ok}
        per_image.append(row)
        log.info("%s done", name)
    summary = summarize(per_image, args.efforts)
    sys.stdout.write(format_table(summary) + "\n")
    with open(args.out, "w") as f:
        json.dump({"corpus": args.corpus, "efforts": args.efforts, "summary": summary,
                   "images": per_image}, f, indent=1, sort_keys=True)
    return 1 if failures else 0


def summarize(per_image, efforts):
    """Per-effort aggregate rows plus a stored-PNG baseline row."""
    if not per_image:
        return []
    pixels = [r["width"] * r["height"] for r in per_image]
    raw = sum(r["raw_bytes"] for r in per_image)
    mp = sum(pixels) / 1e6

    def row(label, sizes, enc=None, dec=None):
        return {
            "method": label,
            "median_bpp": statistics.median(8.0 * s / p for s, p in zip(sizes, pixels)),
            "median_bytes": statistics.median(sizes),
            "ratio": raw / max(1, sum(sizes)),
            "encode_mps": mp / enc if enc else None,
            "decode_mps": mp / dec if dec else None,
        }

    rows = [row("png", [r["png_bytes"] for r in per_image])]
    for e in efforts:
        res = [r["efforts"][e] for r in per_image]
        rows.append(row("effort %d" % e, [x["bytes"] for x in res],
                        sum(x["encode_seconds"] for x in res),
                        sum(x["decode_seconds"] for x in res)))
    return rows


def format_table(rows):
    out = ["method\tmedian_bpp\tmedian_bytes\tratio\tenc_MP/s\tdec_MP/s"]
    for r in rows:
        speed = ["%.3f" % r[k] if r[k] else "-" for k in ("encode_mps", "decode_mps")]
        out.append("%s\t%.4f\t%d\t%.3f\t%s\t%s" % (r["method"], r["median_bpp"],
                                                   r["median_bytes"], r["ratio"], *speed))
    return "\n".join(out)


COMMANDS = {"encode": cmd_encode, "decode": cmd_decode, "roi": cmd_decode,
            "inspect": cmd_inspect, "bench": cmd_bench}


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(stream=sys.stderr, format="modcodec: %(levelname)s: %(message)s",
                        level=logging.INFO if args.verbose else logging.WARNING)
    seed = os.environ.get("MODCODEC_SEED")
    if seed is not None and not seed.strip().lstrip("-").isdigit():
        # the codec has no randomized choices; the variable is only validated
        sys.stderr.write("modcodec: error: MODCODEC_SEED must be an integer\n")
        return 2
    try:
        return COMMANDS[args.command](args)
    except UsageError as e:
        sys.stderr.write("modcodec: error: %s\n" % e)
        return 2
    except (CodecError, OSError, ValueError) as e:
        sys.stderr.write("modcodec: error: %s\n" % e)
        return 1


if __name__ == "__main__":
    sys.exit(main())
