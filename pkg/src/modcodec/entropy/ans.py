"""rANS with 12-bit static distributions and a 32-bit state.

The decoder reads the 32-bit state first, then for every decoded symbol
refills 16 bits whenever the state drops below 2**16.  The encoder therefore
runs backwards over the symbol list and writes the refill chunks in the order
the decoder will ask for them.

Uniform symbols of ``k <= 12`` bits (frequency ``2**(12-k)``) are used to
carry hybrid-uint raw bits through the state, which costs exactly ``k`` bits.
Those symbols carry no redundancy: a damaged raw bit decodes to another raw
value and leaves the final state intact, so the container adds a CRC.
"""

import math

import numpy as np

from ..errors import CorruptStreamError

PRECISION_BITS = 12
TOTAL = 1 << PRECISION_BITS
INITIAL_STATE = 0x130000
MAX_ALPHABET = 256
RAW_CHUNK = 12


def normalize_histogram(counts):
    """Scale ``counts`` to integer frequencies summing to 4096.

    Largest-remainder apportionment; every observed token keeps frequency
    at least 1 and ties are broken towards the lower token index.
    """
    counts = [int(c) for c in counts]
    if len(counts) > MAX_ALPHABET:
        raise ValueError("alphabet larger than 256")
    total = sum(counts)
    if total <= 0:
        raise ValueError("histogram has no observed tokens")
    freqs = []
    rems = []
    for i, c in enumerate(counts):
        q, r = divmod(c * TOTAL, total)
        if c and q == 0:
            q, r = 1, -1
        freqs.append(q)
        rems.append((r, i))
    deficit = TOTAL - sum(freqs)
    if deficit > 0:
        order = sorted((i for i, c in enumerate(counts) if c), key=lambda i: (-rems[i][0], i))
        k = 0
        while deficit:
            freqs[order[k % len(order)]] += 1
            deficit -= 1
            k += 1
    while deficit < 0:
        # take back from the largest entries; they lose the least per unit
        i = max(range(len(freqs)), key=lambda j: (freqs[j], -j))
        freqs[i] -= 1
        deficit += 1
    return freqs


def uniform_distribution(m):
    """Frequencies for a uniform distribution over tokens ``0..m``."""
    n = m + 1
    lo, extra = divmod(TOTAL, n)
    return [lo + 1 if i < extra else lo for i in range(n)]


def _write_hybrid_freq(bw, value):
    # hybrid uint (4,1,0): token via U8, raw bits plain
    if value < 16:
        bw.write_u8(value)
        return
    p = value.bit_length() - 1
    bw.write_u8(16 + ((p - 4) << 1) + ((value >> (p - 1)) & 1))
    bw.write(p - 1, value & ((1 << (p - 1)) - 1))


def _read_hybrid_freq(br):
    token = br.read_u8()
    if token < 16:
        return token
    t = token - 16
    nbits = 3 + (t >> 1)
    if nbits > 10:
        raise CorruptStreamError("frequency out of range")
    return (((t & 1) | 2) << nbits) | br.read(nbits)


def write_distribution(bw, freqs):
    freqs = list(freqs)
    while freqs and freqs[-1] == 0:
        freqs.pop()
    if sum(freqs) != TOTAL or len(freqs) > MAX_ALPHABET or min(freqs) < 0:
        raise ValueError("invalid distribution")
    nz = [i for i, f in enumerate(freqs) if f]
    if len(nz) <= 2:
        bw.write(1, 1)
        if len(nz) == 1:
            bw.write(1, 0)
            bw.write_u8(nz[0])
        else:
            bw.write(1, 1)
            bw.write_u8(nz[0])
            bw.write_u8(nz[1])
            bw.write(12, freqs[nz[0]])
        return
    bw.write(1, 0)
    if freqs == uniform_distribution(len(freqs) - 1):
        bw.write(1, 1)
        bw.write_u8(len(freqs) - 1)
        return
    bw.write(1, 0)
    last = len(freqs) - 1
    bw.write_u8(last)
    i = 0
    while i < last:
        f = freqs[i]
        _write_hybrid_freq(bw, f)
        i += 1
        if f == 0:
            run = 0
            while i < last and freqs[i] == 0 and run < 255:
                run += 1
                i += 1
            bw.write_u8(run)


def read_distribution(br, alphabet_size=MAX_ALPHABET):
    """Inverse of :func:`write_distribution`; returns a list of frequencies."""
    if br.read(1):
        if br.read(1) == 0:
            sym = br.read_u8()
            if sym >= alphabet_size:
                raise CorruptStreamError("singleton token outside alphabet")
            freqs = [0] * (sym + 1)
            freqs[sym] = TOTAL
            return freqs
        a = br.read_u8()
        b = br.read_u8()
        k = br.read(12)
        if a == b or max(a, b) >= alphabet_size or k == 0:
            raise CorruptStreamError("bad two-token distribution")
        freqs = [0] * (max(a, b) + 1)
        freqs[a] = k
        freqs[b] = TOTAL - k
        return freqs
    if br.read(1):
        m = br.read_u8()
        if m >= alphabet_size:
            raise CorruptStreamError("uniform distribution wider than alphabet")
        return uniform_distribution(m)
    last = br.read_u8()
    if last >= alphabet_size:
        raise CorruptStreamError("distribution wider than alphabet")
    freqs = []
    while len(freqs) < last:
        f = _read_hybrid_freq(br)
        freqs.append(f)
        if f == 0:
            run = br.read_u8()
            if len(freqs) + run > last:
                raise CorruptStreamError("zero run past end of distribution")
            freqs.extend([0] * run)
    rest = TOTAL - sum(freqs)
    if rest < 1:
        raise CorruptStreamError("distribution does not sum to 4096")
    freqs.append(rest)
    return freqs


def decode_table(freqs):
    """Direct lookup: for each 12-bit slot, ``(symbol, freq, slot - start)``."""
    table = []
    for sym, f in enumerate(freqs):
        table.extend([(sym, f, j) for j in range(f)])
    if len(table) != TOTAL:
        raise CorruptStreamError("distribution does not sum to 4096")
    return table


def ans_encode_steps(steps, bw):
    """Encode ``(freq, start)`` pairs, given in decode order, into ``bw``."""
    s = INITIAL_STATE
    chunks = []
    push = chunks.append
    for f, start in reversed(steps):
        if s >= f << 20:
            push(s & 0xFFFF)
            s >>= 16
        q, r = divmod(s, f)
        s = (q << PRECISION_BITS) + r + start
    bw.write(32, s)
    for c in reversed(chunks):
        bw.write(16, c)


def cost_bits(counts, freqs):
    """Exact ideal code length (bits) of ``counts`` under ``freqs``."""
    c = np.asarray(counts, dtype=np.float64)
    f = np.zeros(len(c))
    f[: min(len(freqs), len(c))] = freqs[: len(c)]
    mask = c > 0
    if np.any(f[mask] == 0):
        return math.inf
    return float(np.sum(c[mask] * (PRECISION_BITS - np.log2(f[mask]))))
