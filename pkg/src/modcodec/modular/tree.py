"""MA trees: structure, lookup and breadth-first serialization."""

from collections import deque
from dataclasses import dataclass
from typing import List, Union

import numpy as np

from ..entropy.hybrid import pack_signed, unpack_signed
from ..errors import CorruptStreamError
from .predictors import NUM_PREDICTORS

MAX_NODES = 1 << 16
NUM_STATIC_PROPERTIES = 16
MAX_PREV_CHANNELS = 16
MAX_PROPERTIES = NUM_STATIC_PROPERTIES + 4 * MAX_PREV_CHANNELS

# contexts of the tree's own entropy stream
CTX_FLAG, CTX_PROPERTY, CTX_THRESHOLD, CTX_PREDICTOR, CTX_MULTIPLIER, CTX_OFFSET = range(6)
TREE_CONTEXTS = 6


@dataclass
class Leaf:
    predictor: int
    multiplier: int = 1
    offset: int = 0
    context: int = -1


@dataclass
class Decision:
    prop: int
    threshold: int
    left: "Node"   # taken when props[prop] > threshold
    right: "Node"


Node = Union[Leaf, Decision]


class MaTree:
    """A rooted tree; leaf contexts follow breadth-first order."""

    def __init__(self, root):
        self.root = root
        self.leaves: List[Leaf] = []
        count = 0
        for node in self.bfs():
            count += 1
            if isinstance(node, Leaf):
                if node.multiplier < 1:
                    raise ValueError("multiplier must be at least 1")
                if not 0 <= node.predictor < NUM_PREDICTORS:
                    raise ValueError("unknown predictor")
                node.context = len(self.leaves)
                self.leaves.append(node)
            elif not 0 <= node.prop < MAX_PROPERTIES:
                raise ValueError("property index out of range")
        if count > MAX_NODES:
            raise ValueError("tree has too many nodes")
        self.num_nodes = count

    @classmethod
    def single(cls, predictor, multiplier=1, offset=0):
        return cls(Leaf(predictor, multiplier, offset))

    def bfs(self):
        q = deque([self.root])
        while q:
            n = q.popleft()
            yield n
            if isinstance(n, Decision):
                q.append(n.left)
                q.append(n.right)

    @property
    def num_contexts(self):
        return len(self.leaves)

    def depth(self):
        def d(n):
            return 1 + max(d(n.left), d(n.right)) if isinstance(n, Decision) else 1
        return d(self.root)

    def used_properties(self):
        return sorted({n.prop for n in self.bfs() if isinstance(n, Decision)})

    def used_predictors(self):
        return sorted({leaf.predictor for leaf in self.leaves})

    def needs_wp(self):
        return 6 in self.used_predictors() or 15 in self.used_properties()

    def lookup(self, props):
        node = self.root
        while isinstance(node, Decision):
            node = node.left if props[node.prop] > node.threshold else node.right
        return node

    def leaf_index_array(self, prop_planes, shape):
        """Vectorized lookup: leaf context for every position."""
        out = np.zeros(shape, dtype=np.int64)
        flat = out.reshape(-1)
        idx = np.arange(flat.size)

        stack = [(self.root, idx)]
        while stack:
            node, ids = stack.pop()
            if not ids.size:
                continue
            if isinstance(node, Leaf):
                flat[ids] = node.context
                continue
            vals = prop_planes(node.prop).reshape(-1)[ids]
            go_left = vals > node.threshold
            stack.append((node.left, ids[go_left]))
            stack.append((node.right, ids[~go_left]))
        return out

    def __eq__(self, other):
        return isinstance(other, MaTree) and _same(self.root, other.root)

    def describe(self):
        preds = {}
        for leaf in self.leaves:
            preds[leaf.predictor] = preds.get(leaf.predictor, 0) + 1
        return {"nodes": self.num_nodes, "leaves": len(self.leaves), "depth": self.depth(),
                "predictors": dict(sorted(preds.items()))}


def _same(a, b):
    if isinstance(a, Leaf) and isinstance(b, Leaf):
        return (a.predictor, a.multiplier, a.offset) == (b.predictor, b.multiplier, b.offset)
    if isinstance(a, Decision) and isinstance(b, Decision):
        return (a.prop, a.threshold) == (b.prop, b.threshold) and _same(a.left, b.left) \
            and _same(a.right, b.right)
    return False


def tree_tokens(tree):
    """``(contexts, values)`` describing ``tree`` in breadth-first order."""
    ctx, val = [], []
    for node in tree.bfs():
        if isinstance(node, Decision):
            ctx += [CTX_FLAG, CTX_PROPERTY, CTX_THRESHOLD]
            val += [1, node.prop, pack_signed(node.threshold)]
        else:
            ctx += [CTX_FLAG, CTX_PREDICTOR, CTX_MULTIPLIER, CTX_OFFSET]
            val += [0, node.predictor, node.multiplier - 1, pack_signed(node.offset)]
    return ctx, val


def write_tree(bw, tree):
    from ..entropy.stream import build_entropy_code, write_entropy_code, write_symbols

    ctx, val = tree_tokens(tree)
    code, syms = build_entropy_code([(ctx, val)], TREE_CONTEXTS)
    write_entropy_code(bw, code)
    write_symbols(bw, code, syms[0])


def read_tree(br):
    from ..entropy.stream import read_entropy_code

    code = read_entropy_code(br, TREE_CONTEXTS)
    reader = code.reader(br)
    read = reader.read
    nodes = []
    pending = 1
    while pending:
        if len(nodes) >= MAX_NODES:
            raise CorruptStreamError("MA tree exceeds node limit")
        pending -= 1
        if read(CTX_FLAG):
            prop = read(CTX_PROPERTY)
            if prop >= MAX_PROPERTIES:
                raise CorruptStreamError("MA tree property out of range")
            thr = unpack_signed(read(CTX_THRESHOLD))
            nodes.append(Decision(prop, thr, None, None))
            pending += 2
        else:
            pred = read(CTX_PREDICTOR)
            if pred >= NUM_PREDICTORS:
                raise CorruptStreamError("MA tree predictor out of range")
            mult = read(CTX_MULTIPLIER) + 1
            off = unpack_signed(read(CTX_OFFSET))
            if mult >= 1 << 31 or abs(off) >= 1 << 31:
                raise CorruptStreamError("MA tree leaf parameters out of range")
            nodes.append(Leaf(pred, mult, off))
    reader.finish()
    # children of the k-th decision node are the next two unclaimed nodes
    nxt = 1
    for node in nodes:
        if isinstance(node, Decision):
            node.left = nodes[nxt]
            node.right = nodes[nxt + 1]
            nxt += 2
    return MaTree(nodes[0])
