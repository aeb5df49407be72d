"""The self-correcting (weighted) predictor.

Four sub-predictors are blended with weights that fall off with each
sub-predictor's recent absolute error around the current position.  All
internal values carry three extra fractional bits (``X' = 8X``) and the
blend uses only shifts, multiplies and a 64-entry reciprocal table.  The
blend works on offsets from N' so its rounding error does not grow with the
sample magnitude.

Errors are kept for the current and the previous row.  The very first
sample of a channel records no error, so a constant channel predicts
exactly from the second sample on.
"""

from typing import NamedTuple

from ..errors import CorruptStreamError

DIV_LOOKUP = [(1 << 24) // (i + 1) for i in range(64)]


class WPParams(NamedTuple):
    w1: int = 16
    w2: int = 10
    w3: int = 7
    w4: int = 7
    w5: int = 7
    w6: int = 0
    w7: int = 0
    m0: int = 13
    m1: int = 12
    m2: int = 12
    m3: int = 12


DEFAULT_WP = WPParams()


def write_wp_params(bw, params):
    if params == DEFAULT_WP:
        bw.write(1, 1)
        return
    bw.write(1, 0)
    for v in params[:7]:
        bw.write(5, v)
    for v in params[7:]:
        bw.write(4, v)


def read_wp_params(br):
    if br.read(1):
        return DEFAULT_WP
    ws = [br.read(5) for _ in range(7)]
    ms = [br.read(4) for _ in range(4)]
    return WPParams(*ws, *ms)


def _floor_log2(v):
    return v.bit_length() - 1


def error_weight(x, mult):
    shift = _floor_log2(x + 1) - 5
    if shift < 0:
        shift = 0
    return 4 + ((mult * DIV_LOOKUP[x >> shift]) >> shift)


def weighted_average(preds, weights, base=0):
    """Blend ``preds`` by ``weights``; offsets are taken relative to ``base``."""
    total = sum(weights)
    shift = _floor_log2(total) - 4
    if shift < 0:
        raise CorruptStreamError("weighted predictor weight underflow")
    ws = [w >> shift for w in weights]
    wsum = sum(ws)
    acc = (wsum >> 1) - 1
    for p, w in zip(preds, ws):
        acc += (p - base) * w
    return base + ((acc * DIV_LOOKUP[wsum - 1]) >> 24)


class WeightedPredictor:
    """Per-channel state; call :meth:`predict` then :meth:`update` per sample."""

    __slots__ = ("w", "p", "prev", "cur", "subs", "pred8", "row")

    def __init__(self, width, params=DEFAULT_WP):
        self.w = width
        self.p = params
        # per row: [true_err, err0, err1, err2, err3] lists
        self.prev = None
        self.cur = [[0] * width for _ in range(5)]
        self.subs = (0, 0, 0, 0)
        self.pred8 = 0
        self.row = 0

    def start_row(self, y):
        if y > 0:
            self.prev = self.cur
            self.cur = [[0] * self.w for _ in range(5)]
        self.row = y

    def predict(self, x, N, W, NW, NE, NN):
        """Return ``(prediction, max_error)`` at column ``x`` of the current row."""
        p = self.p
        cur = self.cur
        prev = self.prev
        ct = cur[0]
        teW = ct[x - 1] if x > 0 else 0
        if prev is not None:
            xl = x - 1 if x > 0 else 0
            xr = x + 1 if x + 1 < self.w else x
            pt = prev[0]
            teN = pt[x]
            teNW = pt[xl]
            teNE = pt[xr]
        else:
            xl = xr = x
            teN = teNW = teNE = 0
        Np = N << 3
        Wp = W << 3
        NEp = NE << 3
        s0 = Wp + NEp - Np
        s1 = Np - ((p.w1 * (teW + teN + teNE)) >> 5)
        s2 = Wp - ((p.w2 * (teW + teN + teNW)) >> 5)
        s3 = Np - ((p.w3 * teNW + p.w4 * teN + p.w5 * teNE
                    + p.w6 * ((NN << 3) - Np) + p.w7 * ((NW << 3) - Wp)) >> 5)
        div = DIV_LOOKUP
        c1, c2, c3, c4 = cur[1], cur[2], cur[3], cur[4]
        if x > 1:
            e1 = c1[x - 1] + c1[x - 2]
            e2 = c2[x - 1] + c2[x - 2]
            e3 = c3[x - 1] + c3[x - 2]
            e4 = c4[x - 1] + c4[x - 2]
        elif x:
            e1, e2, e3, e4 = c1[0], c2[0], c3[0], c4[0]
        else:
            e1 = e2 = e3 = e4 = 0
        if prev is not None:
            r = prev[1]
            e1 += r[x] + r[xl] + r[xr]
            r = prev[2]
            e2 += r[x] + r[xl] + r[xr]
            r = prev[3]
            e3 += r[x] + r[xl] + r[xr]
            r = prev[4]
            e4 += r[x] + r[xl] + r[xr]
        # error_weight, inlined
        sh = (e1 + 1).bit_length() - 6
        sh = sh if sh > 0 else 0
        a1 = 4 + ((p.m0 * div[e1 >> sh]) >> sh)
        sh = (e2 + 1).bit_length() - 6
        sh = sh if sh > 0 else 0
        a2 = 4 + ((p.m1 * div[e2 >> sh]) >> sh)
        sh = (e3 + 1).bit_length() - 6
        sh = sh if sh > 0 else 0
        a3 = 4 + ((p.m2 * div[e3 >> sh]) >> sh)
        sh = (e4 + 1).bit_length() - 6
        sh = sh if sh > 0 else 0
        a4 = 4 + ((p.m3 * div[e4 >> sh]) >> sh)
        # weighted_average relative to N', inlined
        sh = (a1 + a2 + a3 + a4).bit_length() - 5
        a1 >>= sh
        a2 >>= sh
        a3 >>= sh
        a4 >>= sh
        wsum = a1 + a2 + a3 + a4
        acc = (wsum >> 1) - 1 + (s0 - Np) * a1 + (s1 - Np) * a2 + (s2 - Np) * a3 + (s3 - Np) * a4
        pred = Np + ((acc * div[wsum - 1]) >> 24)
        subs = (s0, s1, s2, s3)
        self.subs = subs
        self.pred8 = pred
        aN = teN if teN >= 0 else -teN
        aW = teW if teW >= 0 else -teW
        return (pred + 3) >> 3, (aN if aN > aW else aW)

    def update(self, x, value):
        if x == 0 and self.row == 0:
            return
        v8 = value << 3
        cur = self.cur
        cur[0][x] = self.pred8 - v8
        s0, s1, s2, s3 = self.subs
        cur[1][x] = s0 - v8 if s0 >= v8 else v8 - s0
        cur[2][x] = s1 - v8 if s1 >= v8 else v8 - s1
        cur[3][x] = s2 - v8 if s2 >= v8 else v8 - s2
        cur[4][x] = s3 - v8 if s3 >= v8 else v8 - s3


def wp_planes(data, params=DEFAULT_WP):
    """Run the predictor over a fully known 2D channel (encoder side).

    Returns ``(predictions, max_errors)`` as nested lists of rows.
    """
    from .predictors import neighbors

    rows = data.tolist() if hasattr(data, "tolist") else data
    h = len(rows)
    w = len(rows[0]) if h else 0
    wp = WeightedPredictor(w, params)
    preds, errs = [], []
    for y in range(h):
        wp.start_row(y)
        prow, erow = [], []
        row = rows[y]
        for x in range(w):
            N, W, NW, NE, NN, _, _ = neighbors(rows, x, y)
            pr, me = wp.predict(x, N, W, NW, NE, NN)
            prow.append(pr)
            erow.append(me)
            wp.update(x, row[x])
        preds.append(prow)
        errs.append(erow)
    return preds, errs
