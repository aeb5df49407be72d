"""Table of contents: section lengths and the optional section permutation."""

from ..entropy.stream import build_entropy_code, read_entropy_code, write_entropy_code, \
    write_symbols
from ..errors import CorruptStreamError

TOC_OFFSETS = (0, 1024, 17408, 4211712)
TOC_BITS = (10, 14, 22, 30)
MAX_SECTION_LENGTH = TOC_OFFSETS[3] + (1 << 30) - 1
LEHMER_CONTEXTS = 8


def write_toc_entry(bw, length):
    for m in range(4):
        if TOC_OFFSETS[m] <= length < TOC_OFFSETS[m] + (1 << TOC_BITS[m]):
            bw.write(2, m)
            bw.write(TOC_BITS[m], length - TOC_OFFSETS[m])
            return m
    raise ValueError("section length %d does not fit a TOC entry" % length)


def read_toc_entry(br):
    m = br.read(2)
    return TOC_OFFSETS[m] + br.read(TOC_BITS[m])


def lehmer_encode(perm):
    n = len(perm)
    if sorted(perm) != list(range(n)):
        raise ValueError("not a permutation")
    unused = list(range(n))
    out = []
    for v in perm:
        k = unused.index(v)
        out.append(k)
        del unused[k]
    return out


def lehmer_decode(code):
    n = len(code)
    unused = list(range(n))
    out = []
    for i, k in enumerate(code):
        if not 0 <= k < n - i:
            raise CorruptStreamError("Lehmer code element out of range")
        out.append(unused.pop(k))
    return out


def lehmer_context(prev):
    # bit_length(v) == ceil(log2(v + 1))
    return min(prev.bit_length(), LEHMER_CONTEXTS - 1)


def _lehmer_tokens(code):
    n = len(code)
    count = 0
    for i, v in enumerate(code):
        if v:
            count = i + 1
    ctx, vals = [lehmer_context(n)], [count]
    prev = 0
    for v in code[:count]:
        ctx.append(lehmer_context(prev))
        vals.append(v)
        prev = v
    return ctx, vals


def write_permutation(bw, perm):
    ctx, vals = _lehmer_tokens(lehmer_encode(perm))
    code, syms = build_entropy_code([(ctx, vals)], LEHMER_CONTEXTS)
    write_entropy_code(bw, code)
    write_symbols(bw, code, syms[0])


def read_permutation(br, n):
    code = read_entropy_code(br, LEHMER_CONTEXTS)
    r = code.reader(br)
    count = r.read(lehmer_context(n))
    if count > n:
        raise CorruptStreamError("Lehmer count exceeds permutation size")
    lehmer = []
    prev = 0
    for _ in range(count):
        v = r.read(lehmer_context(prev))
        lehmer.append(v)
        prev = v
    r.finish()
    return lehmer_decode(lehmer + [0] * (n - count))


def write_toc(bw, lengths, perm=None):
    """Lengths are listed in file order; ``perm[i]`` is the logical section at position i."""
    permuted = perm is not None and list(perm) != list(range(len(lengths)))
    bw.write_bool(permuted)
    if permuted:
        write_permutation(bw, perm)
    bw.align()
    for n in lengths:
        write_toc_entry(bw, n)
    bw.align()


def read_toc(br, n):
    perm = None
    if br.read_bool():
        perm = read_permutation(br, n)
    br.align()
    lengths = [read_toc_entry(br) for _ in range(n)]
    br.align()
    return lengths, perm
