"""Context maps and the move-to-front transform used to code them."""

from ..errors import CorruptStreamError

MAX_CLUSTERS = 255


def mtf_apply(seq):
    table = list(range(256))
    out = []
    for v in seq:
        i = table.index(v)
        out.append(i)
        if i:
            del table[i]
            table.insert(0, v)
    return out


def mtf_undo(seq):
    table = list(range(256))
    out = []
    for i in seq:
        v = table[i]
        out.append(v)
        if i:
            del table[i]
            table.insert(0, v)
    return out


def validate_map(cmap):
    if not cmap:
        raise ValueError("empty context map")
    n = max(cmap) + 1
    if n > MAX_CLUSTERS or min(cmap) < 0:
        raise ValueError("too many clusters")
    if len(set(cmap)) != n:
        raise ValueError("cluster indices must form a contiguous range")
    return n


def _nested_bits(values):
    from ..bitio import BitWriter
    from .stream import build_entropy_code, write_entropy_code, write_symbols

    best = None
    for use_prefix in (False, True):
        bw = BitWriter()
        code, symbols = build_entropy_code([([0] * len(values), values)], 1,
                                           use_prefix=use_prefix, allow_lz77=False)
        write_entropy_code(bw, code)
        write_symbols(bw, code, symbols[0])
        if best is None or bw.bit_length < best.bit_length:
            best = bw
    return best


def write_context_map(bw, cmap):
    validate_map(cmap)
    width = max(cmap).bit_length()
    if width <= 3:
        bw.write(1, 1)
        bw.write(2, width)
        for c in cmap:
            bw.write(width, c)
        return
    plain = _nested_bits(list(cmap))
    moved = _nested_bits(mtf_apply(cmap))
    use_mtf = moved.bit_length < plain.bit_length
    bw.write(1, 0)
    bw.write(1, 1 if use_mtf else 0)
    bw.append(moved if use_mtf else plain)


def read_context_map(br, num_contexts):
    from .stream import read_entropy_code

    if br.read(1):
        width = br.read(2)
        cmap = [br.read(width) for _ in range(num_contexts)]
    else:
        use_mtf = br.read(1)
        code = read_entropy_code(br, 1, allow_lz77=False)
        reader = code.reader(br)
        cmap = [reader.read(0) for _ in range(num_contexts)]
        reader.finish()
        if use_mtf:
            if max(cmap) > 255:
                raise CorruptStreamError("context map MTF index out of range")
            cmap = mtf_undo(cmap)
    n = max(cmap) + 1
    if n > MAX_CLUSTERS or len(set(cmap)) != n:
        raise CorruptStreamError("context map clusters are not contiguous")
    return cmap
