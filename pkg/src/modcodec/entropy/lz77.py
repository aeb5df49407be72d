"""LZ77 parameters, the 2D special-distance table and a greedy match finder."""

from typing import NamedTuple

import numpy as np

from .hybrid import HybridUintConfig

WINDOW_SIZE = 1 << 20
NUM_SPECIAL = 120

MIN_SYMBOL_DISTS = ((224, 0), (512, 9), (4096, 12), (8, 15))
MIN_LENGTH_DISTS = ((3, 0), (4, 2), (8, 4), (16, 8))


def _special_table():
    cands = [(dx, dy) for dy in range(8) for dx in range(-8, 9) if not (dy == 0 and dx <= 0)]
    cands.sort(key=lambda d: (d[0] * d[0] + d[1] * d[1], abs(d[0]), d[0] <= 0))
    cands.remove((0, 1))
    return tuple([(0, 1)] + cands[: NUM_SPECIAL - 1])


# (dx, dy) offsets; dx > 0 looks left, dy > 0 looks up.
SPECIAL_DISTANCES = _special_table()


def special_distance(code, width):
    dx, dy = SPECIAL_DISTANCES[code]
    return max(1, dy * width + dx)


class DistanceMap:
    """Maps distance codes to linear distances for one stream width."""

    def __init__(self, width):
        self.width = max(1, width)
        self.special = [special_distance(c, self.width) for c in range(NUM_SPECIAL)]
        self.max_special = max(self.special)
        # encoder lookup: linear distance -> smallest special code
        self.code_of = {}
        for c, d in enumerate(self.special):
            self.code_of.setdefault(d, c)

    def distance(self, code):
        if code < NUM_SPECIAL:
            return self.special[code]
        return code - NUM_SPECIAL + 1 + self.max_special

    def code(self, dist):
        """Distance code for ``dist`` or ``None`` when unreachable."""
        c = self.code_of.get(dist)
        if c is not None:
            return c
        if dist > self.max_special:
            return dist - 1 - self.max_special + NUM_SPECIAL
        return None


class Lz77Params(NamedTuple):
    min_symbol: int
    min_length: int
    len_config: HybridUintConfig


def find_matches(values, width, min_length, max_candidates=6):
    """Greedy parse of ``values`` into literals and copies.

    Returns a list of ``(start, length, dist)`` copies, non-overlapping and in
    order.  Candidate distances are the nearest 2D neighbours plus the most
    recent previous occurrence found through a small hash of 3-grams.
    """
    v = np.asarray(values, dtype=np.int64)
    n = len(v)
    if n < min_length + 1:
        return []
    dmap = DistanceMap(width)
    cand = []
    for d in (1, dmap.width, dmap.width - 1, dmap.width + 1, 2, 2 * dmap.width):
        if 1 <= d < n and d not in cand and dmap.code(d) is not None:
            cand.append(d)
    cand = cand[:max_candidates]
    # run[k][i] = length of the match at position i with distance cand[k]
    runs = []
    for d in cand:
        eq = np.zeros(n + 1, dtype=np.int64)
        eq[d:n] = v[d:] == v[:-d]
        # reverse cumulative run lengths
        r = np.zeros(n + 1, dtype=np.int64)
        idx = np.flatnonzero(eq[:n] == 0)
        # positions of next mismatch at or after i
        nxt = np.full(n + 1, n, dtype=np.int64)
        nxt[idx] = idx
        nxt = np.minimum.accumulate(nxt[::-1])[::-1]
        r[:n] = nxt[:n] - np.arange(n)
        runs.append(r)
    if not runs:
        return []
    runs = np.stack(runs)
    best_k = np.argmax(runs, axis=0)
    best_len = runs[best_k, np.arange(n + 1)]
    starts = np.flatnonzero(best_len[:n] >= min_length)
    copies = []
    pos = 0
    dists = np.asarray(cand)
    for i in starts.tolist():
        if i < pos:
            continue
        length = int(best_len[i])
        copies.append((i, length, int(dists[best_k[i]])))
        pos = i + length
    return copies
