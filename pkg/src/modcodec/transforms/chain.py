"""The signaled transform chain: description, wire format, apply and undo.

The decoder never sees pre-transform data, so undoing a chain starts from
a *plan*: the chain replayed on channel shapes alone, which yields the
shapes of the coded channels and everything needed to invert each step.
"""

from typing import NamedTuple, Tuple

from ..errors import CorruptStreamError
from .palette import MAX_COLORS, palette_forward, palette_inverse
from .rct import NUM_RCT, rct_forward, rct_inverse
from .squeeze import SqueezeStep, apply_step, default_squeeze_steps, undo_step

KIND_RCT, KIND_PALETTE, KIND_SQUEEZE = range(3)
MAX_CHANNELS = 1 << 16

_COUNT = ((0, 0), (1, 0), (2, 4), (18, 8))
_BEGIN_C = ((0, 3), (8, 6), (72, 10), (1096, 13))
_RCT_TYPE = ((6, 0), (0, 2), (2, 4), (10, 6))
_NUM_C = ((1, 0), (3, 0), (4, 0), (1, 13))
_NUM_COLORS = ((0, 8), (256, 10), (1280, 12), (5376, 16))
_NUM_DELTAS = ((0, 0), (1, 8), (257, 10), (1281, 16))
_NUM_STEPS = ((0, 0), (1, 4), (9, 6), (41, 8))
_STEP_NUM_C = ((1, 0), (2, 0), (3, 0), (4, 4))


class Rct(NamedTuple):
    begin_c: int
    rct_type: int


class Palette(NamedTuple):
    begin_c: int
    num_c: int
    num_colors: int
    num_deltas: int = 0
    predictor: int = 0


class Squeeze(NamedTuple):
    steps: Tuple[SqueezeStep, ...] = ()   # empty means the default order


class Shape(NamedTuple):
    width: int
    height: int
    hshift: int = 0
    vshift: int = 0


def describe(specs):
    out = []
    for s in specs:
        if isinstance(s, Rct):
            out.append("RCT(begin=%d,type=%d)" % s)
        elif isinstance(s, Palette):
            out.append("Palette(begin=%d,channels=%d,colors=%d,deltas=%d)" % s[:4])
        else:
            out.append("Squeeze(%s)" % (len(s.steps) if s.steps else "default"))
    return out


# ---- wire format ----------------------------------------------------------

def write_chain(bw, specs):
    bw.write_u32(len(specs), *_COUNT)
    for s in specs:
        if isinstance(s, Rct):
            bw.write(2, KIND_RCT)
            bw.write_u32(s.begin_c, *_BEGIN_C)
            bw.write_u32(s.rct_type, *_RCT_TYPE)
        elif isinstance(s, Palette):
            bw.write(2, KIND_PALETTE)
            bw.write_u32(s.begin_c, *_BEGIN_C)
            bw.write_u32(s.num_c, *_NUM_C)
            bw.write_u32(s.num_colors, *_NUM_COLORS)
            bw.write_u32(s.num_deltas, *_NUM_DELTAS)
            bw.write(4, s.predictor)
        elif isinstance(s, Squeeze):
            bw.write(2, KIND_SQUEEZE)
            bw.write_u32(len(s.steps), *_NUM_STEPS)
            for st in s.steps:
                bw.write_bool(st.horizontal)
                bw.write_bool(st.in_place)
                bw.write_u32(st.begin_c, *_BEGIN_C)
                bw.write_u32(st.num_c, *_STEP_NUM_C)
        else:
            raise TypeError("unknown transform %r" % (s,))


def read_chain(br):
    specs = []
    for _ in range(br.read_u32(*_COUNT)):
        kind = br.read(2)
        if kind == KIND_RCT:
            specs.append(Rct(br.read_u32(*_BEGIN_C), br.read_u32(*_RCT_TYPE)))
        elif kind == KIND_PALETTE:
            specs.append(Palette(br.read_u32(*_BEGIN_C), br.read_u32(*_NUM_C),
                                 br.read_u32(*_NUM_COLORS), br.read_u32(*_NUM_DELTAS), br.read(4)))
        elif kind == KIND_SQUEEZE:
            steps = []
            for _ in range(br.read_u32(*_NUM_STEPS)):
                hz = br.read_bool()
                ip = br.read_bool()
                steps.append(SqueezeStep(hz, ip, br.read_u32(*_BEGIN_C), br.read_u32(*_STEP_NUM_C)))
            specs.append(Squeeze(tuple(steps)))
        else:
            raise CorruptStreamError("unknown transform kind")
    return specs


# ---- planning on shapes ------------------------------------------------------

class Plan(NamedTuple):
    shapes: list          # shapes of the coded channels
    steps: list           # (tf, extra) per transform, forward order
    nb_meta: int


def _resolve_squeeze(tf, shapes, nb_meta):
    if tf.steps:
        return list(tf.steps)
    if nb_meta >= len(shapes):
        return []
    first = shapes[nb_meta]
    return default_squeeze_steps(first.width, first.height, nb_meta, len(shapes) - nb_meta)


def plan_chain(specs, shapes):
    """Replay ``specs`` on channel shapes; raises CorruptStreamError on invalid chains."""
    shapes = list(shapes)
    nb_meta = 0
    steps = []
    for s in specs:
        if isinstance(s, Rct):
            if not 0 <= s.rct_type < NUM_RCT:
                raise CorruptStreamError("RCT type out of range")
            if s.begin_c + 3 > len(shapes) or s.begin_c < nb_meta:
                raise CorruptStreamError("RCT channel range out of bounds")
            if len({sh[:2] for sh in shapes[s.begin_c:s.begin_c + 3]}) != 1:
                raise CorruptStreamError("RCT channels differ in size")
            steps.append((s, None))
        elif isinstance(s, Palette):
            if s.num_colors > MAX_COLORS or s.num_deltas > s.num_colors:
                raise CorruptStreamError("palette size out of range")
            if s.begin_c < nb_meta or s.begin_c + s.num_c > len(shapes) or s.num_c < 1:
                raise CorruptStreamError("palette channel range out of bounds")
            group = shapes[s.begin_c:s.begin_c + s.num_c]
            if len({sh[:2] for sh in group}) != 1:
                raise CorruptStreamError("palette channels differ in size")
            shapes[s.begin_c:s.begin_c + s.num_c] = [group[0]]
            shapes.insert(0, Shape(s.num_colors, s.num_c))
            nb_meta += 1
            steps.append((s, None))
        else:
            resolved = []
            for st in _resolve_squeeze(s, shapes, nb_meta):
                b, n = st.begin_c, st.num_c
                if b < nb_meta or n < 1 or b + n > len(shapes):
                    raise CorruptStreamError("squeeze step channel range out of bounds")
                sizes = []
                res = []
                for k in range(b, b + n):
                    sh = shapes[k]
                    if st.horizontal:
                        sizes.append(sh.width)
                        shapes[k] = Shape((sh.width + 1) // 2, sh.height, sh.hshift + 1, sh.vshift)
                        res.append(Shape(sh.width // 2, sh.height, sh.hshift + 1, sh.vshift))
                    else:
                        sizes.append(sh.height)
                        shapes[k] = Shape(sh.width, (sh.height + 1) // 2, sh.hshift, sh.vshift + 1)
                        res.append(Shape(sh.width, sh.height // 2, sh.hshift, sh.vshift + 1))
                if st.in_place:
                    shapes[b + n:b + n] = res
                else:
                    shapes.extend(res)
                if len(shapes) > MAX_CHANNELS:
                    raise CorruptStreamError("too many channels")
                resolved.append((st, sizes))
            steps.append((s, resolved))
    return Plan(shapes, steps, nb_meta)


# ---- data ----------------------------------------------------------------------

def apply_chain(specs, channels, bit_depth=8):
    """Run the forward transforms in place; returns the specs as signaled.

    Palette specs always use every distinct color of their channels; the
    returned specs carry the actual color count.
    """
    done = []
    nb_meta = 0
    for s in specs:
        if isinstance(s, Rct):
            rct_forward(channels, s.begin_c, s.rct_type)
        elif isinstance(s, Palette):
            colors = palette_forward(channels, s.begin_c, s.num_c, num_deltas=s.num_deltas,
                                     bit_depth=bit_depth)
            s = s._replace(num_colors=len(colors))
            nb_meta += 1
        else:
            for st in _resolve_squeeze_data(s, channels, nb_meta):
                apply_step(channels, st)
        done.append(s)
    return done


def _resolve_squeeze_data(tf, channels, nb_meta):
    shapes = [Shape(c.width, c.height) for c in channels]
    return _resolve_squeeze(tf, shapes, nb_meta)


def undo_chain(channels, plan, bit_depth=8, local_only=False):
    """Invert the transforms of ``plan`` in place on decoded channels."""
    for tf, extra in reversed(plan.steps):
        if isinstance(tf, Rct):
            rct_inverse(channels, tf.begin_c, tf.rct_type)
        elif isinstance(tf, Palette):
            palette_inverse(channels, tf.begin_c, tf.num_c, tf.num_deltas, tf.predictor,
                            bit_depth, local_only)
        else:
            for st, sizes in reversed(extra):
                undo_step(channels, st, sizes)
    return channels
