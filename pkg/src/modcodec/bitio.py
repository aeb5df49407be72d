"""Bit-granular reader and writer.

Bits are packed least-significant-first within each byte, so ``u(n)`` reads
the next ``n`` bits as a little-endian unsigned integer.  Every read is
bounds-checked: running past the end raises :class:`EndOfStreamError` rather
than silently yielding zeros.

Variable-length integer fields use the four-arm ``U32`` scheme: a 2-bit
selector picks one of four *distributions*, each an ``(offset, nbits)`` pair
meaning ``offset + u(nbits)``.  A constant arm is ``(value, 0)``.
"""

from .errors import CorruptStreamError, EndOfStreamError

# Enum() shorthand: U32(0, 1, 2 + u(4), 18 + u(6)).
ENUM_DISTS = ((0, 0), (1, 0), (2, 4), (18, 6))

# U64() arms before the open-ended longU64 tail.
_U64_ARMS = ((0, 0), (1, 4), (17, 8))

MAX_READ_BITS = 32


class BitReader:
    """Reads bits from ``data[start:end]`` (byte offsets)."""

    __slots__ = ("data", "pos", "end", "start")

    def __init__(self, data, start=0, end=None):
        self.data = data
        if end is None:
            end = len(data)
        if not 0 <= start <= end <= len(data):
            raise ValueError("byte range outside buffer")
        self.start = start * 8
        self.pos = start * 8
        self.end = end * 8

    @property
    def bits_consumed(self):
        return self.pos - self.start

    @property
    def bits_left(self):
        return self.end - self.pos

    def read(self, n):
        """Return the next ``n`` bits (``0 <= n <= 32``) as an unsigned int."""
        if n == 0:
            return 0
        pos = self.pos
        new = pos + n
        if new > self.end:
            raise EndOfStreamError(f"read of {n} bits at bit {pos - self.start} past end")
        self.pos = new
        v = int.from_bytes(self.data[pos >> 3:(new + 7) >> 3], "little")
        return (v >> (pos & 7)) & ((1 << n) - 1)

    def peek(self, n):
        """Like :meth:`read` but does not advance; bits past the end read as 0."""
        pos = self.pos
        stop = min((pos + n + 7) >> 3, self.end >> 3)
        v = int.from_bytes(self.data[pos >> 3:stop], "little") >> (pos & 7)
        avail = self.end - pos
        if avail < n:
            v &= (1 << max(avail, 0)) - 1
        return v & ((1 << n) - 1)

    def skip(self, n):
        if self.pos + n > self.end:
            raise EndOfStreamError(f"skip of {n} bits past end")
        self.pos += n

    def read_bool(self):
        return self.read(1) == 1

    def read_u32(self, d0, d1, d2, d3):
        offset, nbits = (d0, d1, d2, d3)[self.read(2)]
        return offset + self.read(nbits)

    def read_enum(self):
        return self.read_u32(*ENUM_DISTS)

    def read_u64(self):
        sel = self.read(2)
        if sel < 3:
            offset, nbits = _U64_ARMS[sel]
            return offset + self.read(nbits)
        value = self.read(12)
        shift = 12
        while self.read(1):
            if shift == 60:
                value += self.read(4) << shift
                break
            value += self.read(8) << shift
            shift += 8
        return value

    def read_u8(self):
        """U8(): a zero flag, then 3-bit ``n`` and ``n``-bit ``m``; value ``2**n + m``."""
        if self.read(1) == 0:
            return 0
        n = self.read(3)
        return (1 << n) + self.read(n)

    def align(self):
        """Skip to the next byte boundary; the skipped bits must all be zero."""
        pad = -(self.pos - self.start) & 7
        if pad and self.read(pad) != 0:
            raise CorruptStreamError("nonzero padding bits")


class BitWriter:
    """Accumulates bits LSB-first into a growable buffer."""

    __slots__ = ("_buf", "_acc", "_nacc")

    def __init__(self):
        self._buf = bytearray()
        self._acc = 0
        self._nacc = 0

    @property
    def bit_length(self):
        return len(self._buf) * 8 + self._nacc

    def write(self, n, value):
        """Append the low ``n`` bits of ``value``."""
        if value >> n:
            raise ValueError(f"value {value} does not fit in {n} bits")
        self._acc |= value << self._nacc
        self._nacc += n
        if self._nacc >= 64:
            self._flush()

    def _flush(self):
        nbytes = self._nacc >> 3
        if nbytes:
            self._buf += (self._acc & ((1 << (nbytes * 8)) - 1)).to_bytes(nbytes, "little")
            self._acc >>= nbytes * 8
            self._nacc -= nbytes * 8

    def write_bool(self, flag):
        self.write(1, 1 if flag else 0)

    def write_u32(self, value, d0, d1, d2, d3):
        for sel, (offset, nbits) in enumerate((d0, d1, d2, d3)):
            if offset <= value < offset + (1 << nbits):
                self.write(2, sel)
                self.write(nbits, value - offset)
                return
        raise ValueError(f"{value} is not representable by the given U32 distributions")

    def write_enum(self, value):
        self.write_u32(value, *ENUM_DISTS)

    def write_u64(self, value):
        if not 0 <= value < 1 << 64:
            raise ValueError("U64 out of range")
        for sel, (offset, nbits) in enumerate(_U64_ARMS):
            if offset <= value < offset + (1 << nbits):
                self.write(2, sel)
                self.write(nbits, value - offset)
                return
        self.write(2, 3)
        self.write(12, value & 0xFFF)
        rest = value >> 12
        shift = 12
        while rest:
            self.write(1, 1)
            if shift == 60:
                self.write(4, rest)
                return
            self.write(8, rest & 0xFF)
            rest >>= 8
            shift += 8
        self.write(1, 0)

    def write_u8(self, value):
        if not 0 <= value < 256:
            raise ValueError("U8 out of range")
        if value == 0:
            self.write(1, 0)
            return
        n = value.bit_length() - 1
        self.write(1, 1)
        self.write(3, n)
        self.write(n, value - (1 << n))

    def align(self):
        """Pad with zero bits up to the next byte boundary."""
        pad = -self.bit_length & 7
        if pad:
            self.write(pad, 0)

    def append(self, other):
        """Append every bit written to ``other``."""
        other_bits = other.bit_length
        if not other_bits:
            return
        if self._nacc == 0 and not self._buf and not other._nacc:
            self._buf += other._buf
            return
        big = int.from_bytes(bytes(other._buf), "little") | (other._acc << (len(other._buf) * 8))
        self._acc |= big << self._nacc
        self._nacc += other_bits
        self._flush()

    def getvalue(self):
        """Return the bytes written so far; a partial last byte is zero-padded."""
        out = bytes(self._buf)
        if self._nacc:
            out += self._acc.to_bytes((self._nacc + 7) >> 3, "little")
        return out
