"""Groups and sections: which part of which channel lives in which section.

Section 0 is the global section.  It holds every metachannel and every
channel whose sides both fit in one group.  Larger channels are cut into
per-group tiles; a channel with shifts (hs, vs) is cut on the grid of the
image groups scaled down by those shifts, so one group section covers the
same image region in every channel.  With two passes, tiles of channels
whose largest shift is at most 1 (the finest Squeeze residuals and any
unsqueezed channel) go to the second pass.  A frame that fits in a single
group is collapsed into the global section alone.
"""

from typing import NamedTuple

ROI_MARGIN = 4


class Tile(NamedTuple):
    channel: int
    x0: int
    y0: int
    x1: int
    y1: int

    @property
    def width(self):
        return self.x1 - self.x0

    @property
    def height(self):
        return self.y1 - self.y0


def _split(n, step, shift, count, k):
    lo = min(n, (k * step) >> shift)
    hi = n if k == count - 1 else min(n, ((k + 1) * step) >> shift)
    return lo, hi


class Layout:
    def __init__(self, width, height, shapes, nb_meta, group_dim, num_passes=1):
        self.width = width
        self.height = height
        self.group_dim = group_dim
        self.num_passes = num_passes
        self.groups_x = -(-width // group_dim)
        self.groups_y = -(-height // group_dim)
        self.num_groups = self.groups_x * self.groups_y
        self.collapsed = self.num_groups == 1
        self.num_sections = 1 if self.collapsed else 1 + num_passes * self.num_groups
        self.sections = [[] for _ in range(self.num_sections)]
        self.shapes = list(shapes)
        for ci, sh in enumerate(self.shapes):
            if sh.width == 0 or sh.height == 0:
                continue
            if self.collapsed or ci < nb_meta or (sh.width <= group_dim and sh.height <= group_dim):
                self.sections[0].append(Tile(ci, 0, 0, sh.width, sh.height))
                continue
            p = self.pass_of(sh)
            for g in range(self.num_groups):
                gx, gy = g % self.groups_x, g // self.groups_x
                x0, x1 = _split(sh.width, group_dim, sh.hshift, self.groups_x, gx)
                y0, y1 = _split(sh.height, group_dim, sh.vshift, self.groups_y, gy)
                if x1 > x0 and y1 > y0:
                    self.sections[self.section_id(p, g)].append(Tile(ci, x0, y0, x1, y1))

    def pass_of(self, shape):
        if self.num_passes == 1:
            return 0
        return 1 if max(shape.hshift, shape.vshift) <= 1 else 0

    def section_id(self, p, g):
        return 1 + p * self.num_groups + g

    def section_info(self, s):
        """``(pass, group)`` of a section; ``(None, None)`` for the global one."""
        if s == 0:
            return None, None
        return divmod(s - 1, self.num_groups)

    def group_rect(self, g):
        gx, gy = g % self.groups_x, g // self.groups_x
        d = self.group_dim
        return gx * d, gy * d, min(self.width, (gx + 1) * d), min(self.height, (gy + 1) * d)

    def center_first_order(self):
        """Section order with groups sorted by distance to the image center."""
        cx, cy = self.width / 2, self.height / 2

        def dist(g):
            x0, y0, x1, y1 = self.group_rect(g)
            return ((x0 + x1) / 2 - cx) ** 2 + ((y0 + y1) / 2 - cy) ** 2

        if self.collapsed:
            return [0]
        order = sorted(range(self.num_groups), key=lambda g: (dist(g), g))
        return [0] + [self.section_id(p, g) for p in range(self.num_passes) for g in order]

    def sections_for_rect(self, x0, y0, x1, y1, widen=False):
        """Sections whose tiles are needed to reconstruct an image rectangle.

        With ``widen``, every channel is needed from its origin up to the
        rectangle's far corner plus a margin, which covers the left/top
        dependency chain of inverse Squeeze steps.
        """
        need = {0}
        for s in range(1, self.num_sections):
            for t in self.sections[s]:
                sh = self.shapes[t.channel]
                cx1 = -(-x1 >> sh.hshift)
                cy1 = -(-y1 >> sh.vshift)
                if widen:
                    cx0 = cy0 = 0
                    cx1 += ROI_MARGIN
                    cy1 += ROI_MARGIN
                else:
                    cx0, cy0 = x0 >> sh.hshift, y0 >> sh.vshift
                if t.x0 < cx1 and cx0 < t.x1 and t.y0 < cy1 and cy0 < t.y1:
                    need.add(s)
                    break
        return need
