"""Entropy-coded streams: header layout, encoder construction and readers.

Header layout, in order::

    lz77 flag [min_symbol, min_length, length config]
    context map (one entry per context, plus the distance context with LZ77)
    prefix flag; for ANS a 2-bit log alphabet size (alphabet = 2**(n+5))
    hybrid config per cluster
    distribution (ANS) or prefix code per cluster

The payload of a stream follows directly.  For ANS it is the 32-bit state
followed by 16-bit refill chunks; raw bits travel through the state as
uniform symbols.  Prefix streams interleave codes and plain raw bits.
"""

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from ..errors import CorruptStreamError
from . import ans
from .context_map import read_context_map, write_context_map
from .hybrid import DEFAULT_CONFIG, HybridUintConfig, split_tokens_array
from .lz77 import (
    MIN_LENGTH_DISTS,
    MIN_SYMBOL_DISTS,
    WINDOW_SIZE,
    DistanceMap,
    Lz77Params,
    find_matches,
)
from .prefix import MAX_ALPHABET as PREFIX_MAX_ALPHABET
from .prefix import PrefixCode, read_prefix_code, write_prefix_code

CONFIG_CANDIDATES = [HybridUintConfig(*c) for c in (
    (4, 1, 0), (4, 2, 0), (4, 1, 1), (4, 0, 0), (3, 1, 0), (5, 1, 0), (5, 2, 0), (5, 2, 1),
    (6, 2, 0), (6, 1, 1), (7, 2, 0), (2, 1, 0), (1, 0, 0), (0, 0, 0), (4, 2, 1), (6, 3, 0),
    (8, 2, 0), (3, 0, 0), (8, 0, 0), (8, 3, 0),
)]
DEFAULT_LEN_CONFIG = HybridUintConfig(0, 0, 0)


@dataclass
class EntropyCode:
    num_contexts: int
    context_map: List[int]
    configs: List[HybridUintConfig]
    use_prefix: bool = False
    log_alpha: int = 3
    freqs: list = field(default_factory=list)
    prefix_codes: list = field(default_factory=list)
    lz77: Optional[Lz77Params] = None
    lz77_width: int = 1
    _tables: Optional[list] = None

    @property
    def num_clusters(self):
        return len(self.configs)

    @property
    def dist_context(self):
        return self.num_contexts

    def reader(self, br, lz77_width=None):
        if lz77_width is not None:
            self.lz77_width = lz77_width
        if self.lz77 is not None:
            return Lz77Reader(self, br)
        if self.use_prefix:
            return PrefixReader(self, br)
        return AnsReader(self, br)

    def tables(self):
        if self._tables is None:
            self._tables = [ans.decode_table(f) for f in self.freqs]
        return self._tables


def _write_config(bw, cfg):
    split, msb, lsb = cfg
    bw.write(4, split)
    nb = split.bit_length()
    bw.write(nb, msb)
    bw.write(nb, lsb)


def _read_config(br):
    split = br.read(4)
    nb = split.bit_length()
    msb = br.read(nb)
    lsb = br.read(nb)
    if msb + lsb > split:
        raise CorruptStreamError("invalid hybrid uint config")
    return HybridUintConfig(split, msb, lsb)


def write_entropy_code(bw, code):
    if code.lz77 is not None:
        bw.write(1, 1)
        bw.write_u32(code.lz77.min_symbol, *MIN_SYMBOL_DISTS)
        bw.write_u32(code.lz77.min_length, *MIN_LENGTH_DISTS)
        _write_config(bw, code.lz77.len_config)
    else:
        bw.write(1, 0)
    write_context_map(bw, code.context_map)
    bw.write(1, 1 if code.use_prefix else 0)
    if not code.use_prefix:
        bw.write(2, code.log_alpha)
    for cfg in code.configs:
        _write_config(bw, cfg)
    if code.use_prefix:
        for pc in code.prefix_codes:
            write_prefix_code(bw, pc)
    else:
        for f in code.freqs:
            ans.write_distribution(bw, f)


def read_entropy_code(br, num_contexts, allow_lz77=True):
    lz77 = None
    if br.read(1):
        if not allow_lz77:
            raise CorruptStreamError("LZ77 is not allowed in a nested context-map stream")
        min_symbol = br.read_u32(*MIN_SYMBOL_DISTS)
        min_length = br.read_u32(*MIN_LENGTH_DISTS)
        lz77 = Lz77Params(min_symbol, min_length, _read_config(br))
    total = num_contexts + (1 if lz77 else 0)
    cmap = read_context_map(br, total)
    nclusters = max(cmap) + 1
    use_prefix = bool(br.read(1))
    log_alpha = 0 if use_prefix else br.read(2)
    configs = [_read_config(br) for _ in range(nclusters)]
    code = EntropyCode(num_contexts, cmap, configs, use_prefix, log_alpha, lz77=lz77)
    if use_prefix:
        code.prefix_codes = [read_prefix_code(br, PREFIX_MAX_ALPHABET) for _ in range(nclusters)]
    else:
        alphabet = 1 << (log_alpha + 5)
        code.freqs = [ans.read_distribution(br, alphabet) for _ in range(nclusters)]
        code.tables()
    return code


# ----------------------------------------------------------------------------
# decoding


class AnsReader:
    """Decodes hybrid-uint values from an ANS stream."""

    def __init__(self, code, br):
        self.br = br
        self.cmap = code.context_map
        self.tables = code.tables()
        self.cfgs = [(1 << s, s - m - l, m + l, l, m) for s, m, l in code.configs]
        self.state = br.read(32)

    def read_token(self, c):
        s = self.state
        sym, f, off = self.tables[c][s & 0xFFF]
        s = f * (s >> 12) + off
        if s < 0x10000:
            s = (s << 16) | self.br.read(16)
        self.state = s
        return sym

    def read_raw(self, nbits):
        s = self.state
        raw = 0
        while nbits:
            k = 12 if nbits > 12 else nbits
            nbits -= k
            keep = 12 - k
            idx = s & 0xFFF
            raw = (raw << k) | (idx >> keep)
            s = ((s >> 12) << keep) | (idx & ((1 << keep) - 1))
            if s < 0x10000:
                s = (s << 16) | self.br.read(16)
        self.state = s
        return raw

    def read(self, ctx):
        c = self.cmap[ctx]
        s = self.state
        sym, f, off = self.tables[c][s & 0xFFF]
        s = f * (s >> 12) + off
        if s < 0x10000:
            s = (s << 16) | self.br.read(16)
        self.state = s
        lim, base, ml, lsb, msb = self.cfgs[c]
        if sym < lim:
            return sym
        return self._merge(sym - lim, base, ml, lsb, msb)

    def _merge(self, t, base, ml, lsb, msb):
        nbits = base + (t >> ml)
        if nbits > 32:
            raise CorruptStreamError("hybrid uint value exceeds 32 bits")
        low = t & ((1 << lsb) - 1)
        top = ((t >> lsb) & ((1 << msb) - 1)) | (1 << msb)
        return (((top << nbits) | self.read_raw(nbits)) << lsb) | low

    def finish(self):
        if self.state != ans.INITIAL_STATE:
            raise CorruptStreamError("ANS final state mismatch")


class PrefixReader(AnsReader):
    def __init__(self, code, br):
        self.br = br
        self.cmap = code.context_map
        self.codes = code.prefix_codes
        self.cfgs = [(1 << s, s - m - l, m + l, l, m) for s, m, l in code.configs]

    def read_token(self, c):
        return self.codes[c].decode(self.br)

    def read_raw(self, nbits):
        return self.br.read(nbits)

    def read(self, ctx):
        c = self.cmap[ctx]
        sym = self.codes[c].decode(self.br)
        lim, base, ml, lsb, msb = self.cfgs[c]
        if sym < lim:
            return sym
        return self._merge(sym - lim, base, ml, lsb, msb)

    def finish(self):
        pass


class Lz77Reader:
    """Wraps a token reader with LZ77 copy handling."""

    def __init__(self, code, br):
        base = PrefixReader(code, br) if code.use_prefix else AnsReader(code, br)
        self.base = base
        self.cmap = code.context_map
        self.min_symbol = code.lz77.min_symbol
        self.min_length = code.lz77.min_length
        s, m, l = code.lz77.len_config
        self.len_cfg = (1 << s, s - m - l, m + l, l, m)
        self.dist_ctx = code.dist_context
        self.dmap = DistanceMap(code.lz77_width)
        self.window = []
        self.copy_left = 0
        self.copy_dist = 0

    def read(self, ctx):
        win = self.window
        if self.copy_left:
            self.copy_left -= 1
            v = win[-self.copy_dist]
            win.append(v)
            return v
        base = self.base
        c = self.cmap[ctx]
        sym = base.read_token(c)
        if sym >= self.min_symbol:
            t = sym - self.min_symbol
            lim, b, ml, lsb, msb = self.len_cfg
            length = (t if t < lim else base._merge(t - lim, b, ml, lsb, msb)) + self.min_length
            dcode = self._plain(self.dist_ctx)
            dist = self.dmap.distance(dcode)
            if dist > len(win) or dist > WINDOW_SIZE:
                raise CorruptStreamError("LZ77 distance exceeds history")
            self.copy_dist = dist
            self.copy_left = length - 1
            v = win[-dist]
            win.append(v)
            return v
        lim, b, ml, lsb, msb = base.cfgs[c]
        v = sym if sym < lim else base._merge(sym - lim, b, ml, lsb, msb)
        win.append(v)
        return v

    def _plain(self, ctx):
        base = self.base
        c = self.cmap[ctx]
        sym = base.read_token(c)
        lim, b, ml, lsb, msb = base.cfgs[c]
        return sym if sym < lim else base._merge(sym - lim, b, ml, lsb, msb)

    def finish(self):
        if self.copy_left:
            raise CorruptStreamError("stream ended inside an LZ77 copy")
        self.base.finish()


# ----------------------------------------------------------------------------
# encoding


@dataclass
class SymbolStream:
    """Tokenized form of one stream: per symbol cluster, token, raw count, raw."""

    clusters: np.ndarray
    tokens: np.ndarray
    nbits: np.ndarray
    raw: np.ndarray


def _lz77_items(ctx, vals, width, num_contexts, min_length):
    """Replace repeated runs by copy items.

    Returns ``(ctx, value, kind)`` arrays where kind is 0 for a literal, 1 for
    a copy length (value = length - min_length) and 2 for a distance code.
    """
    copies = find_matches(vals, width, min_length)
    if not copies:
        return ctx, vals, np.zeros(len(vals), dtype=np.int8)
    dmap = DistanceMap(width)
    out_ctx, out_val, out_kind = [], [], []
    pos = 0
    for start, length, dist in copies:
        out_ctx.append(ctx[pos:start])
        out_val.append(vals[pos:start])
        out_kind.append(np.zeros(start - pos, dtype=np.int8))
        out_ctx.append(np.array([ctx[start], num_contexts]))
        out_val.append(np.array([length - min_length, dmap.code(dist)]))
        out_kind.append(np.array([1, 2], dtype=np.int8))
        pos = start + length
    out_ctx.append(ctx[pos:])
    out_val.append(vals[pos:])
    out_kind.append(np.zeros(len(vals) - pos, dtype=np.int8))
    return (np.concatenate(out_ctx).astype(np.int64), np.concatenate(out_val).astype(np.int64),
            np.concatenate(out_kind))


def _entropy_bits(counts):
    c = counts[counts > 0].astype(np.float64)
    if c.size <= 1:
        return 0.0
    t = c.sum()
    return float(-(c * np.log2(c / t)).sum())


def _best_config(values, counts, alphabet_limit, candidates):
    best = None
    for cfg in candidates:
        tok, nb, _ = split_tokens_array(values, cfg)
        if tok.size and tok.max() >= alphabet_limit:
            continue
        hist = np.bincount(tok, weights=counts)
        cost = _entropy_bits(hist) + float((nb * counts).sum()) + 4.0 * np.count_nonzero(hist)
        if best is None or cost < best[0]:
            best = (cost, cfg)
    return best[1] if best else HybridUintConfig(0, 0, 0)


def build_entropy_code(streams, num_contexts, *, use_prefix=False, lz77=False, widths=None,
                       context_map=None, allow_lz77=True, config_search=True, clusterer=None,
                       max_clusters=255):
    """Choose an entropy code for ``streams`` and tokenize them.

    ``streams`` is a list of ``(contexts, values)`` pairs sharing the code.
    Returns ``(code, symbol_streams)``.
    """
    streams = [(np.asarray(c, dtype=np.int64), np.asarray(v, dtype=np.int64)) for c, v in streams]
    for c, v in streams:
        if v.size and (v.min() < 0 or v.max() >= 1 << 32):
            raise ValueError("stream values must be unsigned 32-bit")
        if c.size and (c.min() < 0 or c.max() >= num_contexts):
            raise ValueError("context out of range")
    lz = None
    items = []
    total_ctx = num_contexts
    if lz77 and allow_lz77:
        min_length = 3
        widths = widths or [1] * len(streams)
        items = [_lz77_items(c, v, w, num_contexts, min_length) for (c, v), w in zip(streams, widths)]
        if any((k == 1).any() for _, _, k in items):
            lz = Lz77Params(0, min_length, DEFAULT_LEN_CONFIG)
            total_ctx = num_contexts + 1
    if lz is None:
        items = [(c, v, np.zeros(len(v), dtype=np.int8)) for c, v in streams]

    all_ctx = np.concatenate([i[0] for i in items]) if items else np.zeros(0, np.int64)
    all_val = np.concatenate([i[1] for i in items]) if items else np.zeros(0, np.int64)
    all_kind = np.concatenate([i[2] for i in items]) if items else np.zeros(0, np.int8)
    lit = all_kind != 1

    # histograms with the default config drive clustering
    tok0, _, _ = split_tokens_array(all_val, DEFAULT_CONFIG)
    len_tok, len_nb, _ = split_tokens_array(all_val, DEFAULT_LEN_CONFIG)
    base_alpha = int(tok0.max()) + 1 if tok0.size else 1
    ext_tok = np.where(lit, tok0, base_alpha + len_tok)
    ext_alpha = int(ext_tok.max()) + 1 if ext_tok.size else 1
    hists = np.zeros((total_ctx, max(ext_alpha, 1)), dtype=np.int64)
    np.add.at(hists, (all_ctx, ext_tok), 1)

    if context_map is None:
        if clusterer is None:
            from ..heuristics.clustering import cluster_histograms as clusterer
        context_map = clusterer(hists, max_clusters=max_clusters)
    context_map = list(context_map)
    nclusters = max(context_map) + 1
    cmap_arr = np.asarray(context_map, dtype=np.int64)
    clusters_all = cmap_arr[all_ctx] if all_ctx.size else all_ctx

    alphabet_cap = PREFIX_MAX_ALPHABET if use_prefix else ans.MAX_ALPHABET
    max_len_tok = int(len_tok[~lit].max()) if (~lit).any() else 0
    reserve = (max_len_tok + 1) if lz else 0
    configs = []
    for k in range(nclusters):
        sel = (clusters_all == k) & lit
        vals, counts = np.unique(all_val[sel], return_counts=True)
        if not config_search or vals.size == 0:
            cands = [DEFAULT_CONFIG]
        else:
            cands = CONFIG_CANDIDATES
        cfg = _best_config(vals, counts, alphabet_cap - reserve, cands)
        configs.append(cfg)

    cfg_arr = np.array(configs, dtype=np.int64).reshape(-1, 3)
    tokens = np.zeros(all_val.shape, dtype=np.int64)
    nbits = np.zeros(all_val.shape, dtype=np.int64)
    raws = np.zeros(all_val.shape, dtype=np.int64)
    for k in range(nclusters):
        sel = (clusters_all == k) & lit
        if sel.any():
            t, n, r = split_tokens_array(all_val[sel], tuple(cfg_arr[k]))
            tokens[sel], nbits[sel], raws[sel] = t, n, r
    if lz is not None:
        max_regular = int(tokens[lit].max()) if lit.any() else 0
        min_symbol = max(8, max_regular + 1)
        lz = Lz77Params(min_symbol, lz.min_length, lz.len_config)
        t, n, r = split_tokens_array(all_val[~lit], DEFAULT_LEN_CONFIG)
        tokens[~lit], nbits[~lit], raws[~lit] = t + min_symbol, n, r

    max_tok = int(tokens.max()) if tokens.size else 0
    if max_tok >= alphabet_cap:
        raise ValueError("token alphabet exceeds backend limit")
    code = EntropyCode(num_contexts, context_map, configs, use_prefix, lz77=lz)
    code.lz77_width = widths[0] if (lz and widths) else 1
    counts = np.zeros((nclusters, max_tok + 1), dtype=np.int64)
    if tokens.size:
        np.add.at(counts, (clusters_all, tokens), 1)
    if use_prefix:
        code.prefix_codes = [PrefixCode.from_counts(row) if row.any() else PrefixCode([0], single=0)
                             for row in counts]
    else:
        code.log_alpha = next(n for n in range(4) if max_tok < 1 << (n + 5))
        code.freqs = [ans.normalize_histogram(_trim(row)) if row.any() else [ans.TOTAL]
                      for row in counts]

    out = []
    pos = 0
    for c, v, k in items:
        n = len(v)
        out.append(SymbolStream(clusters_all[pos:pos + n], tokens[pos:pos + n],
                                nbits[pos:pos + n], raws[pos:pos + n]))
        pos += n
    return code, out


def _trim(row):
    nz = np.flatnonzero(row)
    return row[: nz[-1] + 1]


def write_symbols(bw, code, sym):
    """Write one tokenized stream's payload."""
    clusters = sym.clusters.tolist()
    tokens = sym.tokens.tolist()
    nbits = sym.nbits.tolist()
    raws = sym.raw.tolist()
    if code.use_prefix:
        pcs = code.prefix_codes
        for c, t, n, r in zip(clusters, tokens, nbits, raws):
            pcs[c].encode(bw, t)
            if n:
                bw.write(n, r)
        return
    starts = []
    for f in code.freqs:
        acc = 0
        st = []
        for x in f:
            st.append(acc)
            acc += x
        starts.append(st)
    freqs = code.freqs
    steps = []
    push = steps.append
    for c, t, n, r in zip(clusters, tokens, nbits, raws):
        push((freqs[c][t], starts[c][t]))
        while n:
            k = 12 if n > 12 else n
            n -= k
            push((1 << (12 - k), ((r >> n) & ((1 << k) - 1)) << (12 - k)))
    ans.ans_encode_steps(steps, bw)


def estimate_bits(code, symstreams):
    """Approximate payload size in bits (ideal code lengths, no header)."""
    total = 0.0
    for sym in symstreams:
        if not sym.tokens.size:
            continue
        total += float(sym.nbits.sum())
        if code.use_prefix:
            lens = [np.asarray(pc.lengths + [0]) for pc in code.prefix_codes]
            total += float(sum(lens[c][t] if t < len(lens[c]) else 0
                               for c, t in zip(sym.clusters.tolist(), sym.tokens.tolist())))
        else:
            width = max(len(f) for f in code.freqs)
            table = np.zeros((len(code.freqs), width))
            for i, f in enumerate(code.freqs):
                table[i, : len(f)] = f
            f = table[sym.clusters, sym.tokens]
            total += float((12 - np.log2(f)).sum())
    return total + 32 * len(symstreams)
