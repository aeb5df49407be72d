"""Canonical prefix (Huffman) codes, length-limited to 15 bits.

Codes are assigned canonically (shorter first, then by token index) and
written bit-reversed so an LSB-first reader sees the first code bit first.
"""

import heapq

from ..errors import CorruptStreamError

MAX_LENGTH = 15
MAX_ALPHABET = 1 << 15


def huffman_lengths(counts, max_length=MAX_LENGTH):
    """Code lengths for ``counts``; unused tokens get length 0."""
    counts = [int(c) for c in counts]
    used = [i for i, c in enumerate(counts) if c > 0]
    lengths = [0] * len(counts)
    if len(used) <= 1:
        return lengths
    work = counts[:]
    while True:
        heap = [(work[i], i, (i,)) for i in used]
        heapq.heapify(heap)
        depth = dict.fromkeys(used, 0)
        tie = len(counts)
        while len(heap) > 1:
            c1, _, s1 = heapq.heappop(heap)
            c2, _, s2 = heapq.heappop(heap)
            for i in s1 + s2:
                depth[i] += 1
            heapq.heappush(heap, (c1 + c2, tie, s1 + s2))
            tie += 1
        if max(depth.values()) <= max_length:
            for i in used:
                lengths[i] = depth[i]
            return lengths
        work = [(c + 1) // 2 if c else 0 for c in work]


def canonical_codes(lengths):
    """Return bit-reversed canonical codes (``None`` for unused tokens)."""
    max_len = max(lengths, default=0)
    bl_count = [0] * (max_len + 1)
    for n in lengths:
        if n:
            bl_count[n] += 1
    next_code = [0] * (max_len + 2)
    code = 0
    for bits in range(1, max_len + 1):
        code = (code + bl_count[bits - 1]) << 1
        next_code[bits] = code
    codes = [None] * len(lengths)
    for i, n in enumerate(lengths):
        if n:
            c = next_code[n]
            next_code[n] += 1
            codes[i] = int(format(c, f"0{n}b")[::-1], 2)
    return codes


def kraft_ok(lengths):
    return sum(1 << (MAX_LENGTH - n) for n in lengths if n) <= 1 << MAX_LENGTH


class PrefixCode:
    """Encoder/decoder tables for one context cluster."""

    def __init__(self, lengths, single=None):
        self.single = single
        self.lengths = list(lengths)
        if single is not None:
            return
        if any(n < 0 or n > MAX_LENGTH for n in self.lengths):
            raise CorruptStreamError("code length out of range")
        if sum(1 for n in self.lengths if n) < 2 or not kraft_ok(self.lengths):
            raise CorruptStreamError("invalid prefix code lengths")
        self.codes = canonical_codes(self.lengths)
        self.max_len = max(self.lengths)
        table = [None] * (1 << self.max_len)
        for sym, (n, c) in enumerate(zip(self.lengths, self.codes)):
            if n:
                entry = (sym, n)
                for hi in range(1 << (self.max_len - n)):
                    table[c | (hi << n)] = entry
        self.table = table

    @classmethod
    def from_counts(cls, counts):
        used = [i for i, c in enumerate(counts) if c]
        if len(used) == 1:
            return cls([0] * len(counts), single=used[0])
        return cls(huffman_lengths(counts))

    def encode(self, bw, sym):
        if self.single is None:
            bw.write(self.lengths[sym], self.codes[sym])

    def decode(self, br):
        if self.single is not None:
            return self.single
        entry = self.table[br.peek(self.max_len)]
        if entry is None:
            raise CorruptStreamError("invalid prefix code")
        br.skip(entry[1])
        return entry[0]

    def cost(self, sym):
        return 0 if self.single is not None else self.lengths[sym]


def _write_varlen(bw, v):
    nb = v.bit_length()
    bw.write(4, nb)
    if nb > 1:
        bw.write(nb - 1, v - (1 << (nb - 1)))


def _read_varlen(br):
    nb = br.read(4)
    if nb <= 1:
        return nb
    return (1 << (nb - 1)) + br.read(nb - 1)


def write_prefix_code(bw, code):
    if code.single is not None:
        bw.write(1, 1)
        _write_varlen(bw, code.single)
        return
    lengths = code.lengths
    last = max(i for i, n in enumerate(lengths) if n)
    bw.write(1, 0)
    _write_varlen(bw, last)
    i = 0
    while i <= last:
        n = lengths[i]
        if n == 0:
            run = 1
            while i + run <= last and lengths[i + run] == 0 and run < 17:
                run += 1
            if run >= 2:
                bw.write(5, run + 14)
                i += run
                continue
        bw.write(5, n)
        i += 1


def read_prefix_code(br, alphabet_size=MAX_ALPHABET):
    if br.read(1):
        sym = _read_varlen(br)
        if sym >= alphabet_size:
            raise CorruptStreamError("prefix symbol outside alphabet")
        return PrefixCode([0] * (sym + 1), single=sym)
    last = _read_varlen(br)
    if last >= alphabet_size:
        raise CorruptStreamError("prefix alphabet too large")
    lengths = []
    while len(lengths) <= last:
        v = br.read(5)
        if v >= 16:
            lengths.extend([0] * (v - 14))
        else:
            lengths.append(v)
    if len(lengths) != last + 1:
        raise CorruptStreamError("zero run past end of prefix code")
    return PrefixCode(lengths)
