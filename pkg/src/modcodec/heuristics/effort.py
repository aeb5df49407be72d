"""The effort ladder: what the encoder is allowed to try at each level.

====== ============ ======================== =============== ========== =====
effort tree          predictors               properties      RCTs       LZ77
====== ============ ======================== =============== ========== =====
1      single leaf  Gradient                 none            0, 6, 10   no
2      fixed        Gradient                 W-NW, NW-N      0, 6, 10   no
3      fixed        Weighted                 max_error       0, 6, 10   no
4      learned      Gradient, Weighted       0-15            0, 6, 10   no
5      learned      Gradient, Weighted       0-15, 2 prev    0, 6, 10   no
6      learned      all 14                   0-15, 2 prev    0, 6, 10   no
7      learned      all 14                   0-15, 4 prev    0, 6, 10   yes
8      learned      all 14                   0-15, 8 prev    all 42     yes
9      learned      all 14                   0-15, 16 prev   all 42     yes
====== ============ ======================== =============== ========== =====
"""

from dataclasses import dataclass
from typing import Tuple

from ..modular.predictors import GRADIENT, NUM_PREDICTORS, WEIGHTED
from ..modular.tree import Decision, Leaf, MaTree

LOW_RCTS = (0, 6, 10)
ALL_RCTS = tuple(range(42))
DEFAULT_EFFORT = 7


@dataclass(frozen=True)
class EffortConfig:
    effort: int
    fixed_tree: str = ""                     # "", "single", "gradient" or "weighted"
    predictors: Tuple[int, ...] = (GRADIENT,)
    properties: Tuple[int, ...] = ()
    prev_channels: int = 0
    rct_candidates: Tuple[int, ...] = LOW_RCTS
    palette_threshold: int = 1024
    lz77: bool = False
    thresholds: int = 16                     # candidate split points per property
    max_samples: int = 1 << 17
    max_depth: int = 12
    max_leaves: int = 256

    @property
    def learn_tree(self):
        return not self.fixed_tree


_STATIC = tuple(range(16))
_ALL_PRED = tuple(range(NUM_PREDICTORS))

_LADDER = {
    1: EffortConfig(1, fixed_tree="single"),
    2: EffortConfig(2, fixed_tree="gradient"),
    3: EffortConfig(3, fixed_tree="weighted", predictors=(WEIGHTED,)),
    4: EffortConfig(4, predictors=(GRADIENT, WEIGHTED), properties=_STATIC, thresholds=12,
                    max_leaves=64),
    5: EffortConfig(5, predictors=(GRADIENT, WEIGHTED), properties=_STATIC, prev_channels=2,
                    max_leaves=128),
    6: EffortConfig(6, predictors=_ALL_PRED, properties=_STATIC, prev_channels=2),
    7: EffortConfig(7, predictors=_ALL_PRED, properties=_STATIC, prev_channels=4, lz77=True),
    8: EffortConfig(8, predictors=_ALL_PRED, properties=_STATIC, prev_channels=8,
                    rct_candidates=ALL_RCTS, lz77=True, thresholds=24),
    9: EffortConfig(9, predictors=_ALL_PRED, properties=_STATIC, prev_channels=16,
                    rct_candidates=ALL_RCTS, lz77=True, thresholds=32, max_depth=16,
                    max_leaves=512),
}


def effort_config(effort):
    if effort not in _LADDER:
        raise ValueError("effort must be in [1, 9]")
    return _LADDER[effort]


def _balanced(prop, thresholds, make_leaf):
    """Binary tree routing values into the bins delimited by ``thresholds`` (ascending)."""
    if not thresholds:
        return make_leaf()
    mid = len(thresholds) // 2
    return Decision(prop, thresholds[mid],
                    _balanced(prop, thresholds[mid + 1:], make_leaf),
                    _balanced(prop, thresholds[:mid], make_leaf))


_GRAD_THRESHOLDS = (-32, -8, -2, 0, 1, 7, 31)
_ERR_THRESHOLDS = (7, 23, 55, 119, 247, 503, 1015, 2039)


def fixed_tree(kind):
    """The fixed trees used below effort 4."""
    if kind == "single":
        return MaTree.single(GRADIENT)
    if kind == "gradient":
        def body():
            return _balanced(10, _GRAD_THRESHOLDS,
                             lambda: _balanced(11, _GRAD_THRESHOLDS, lambda: Leaf(GRADIENT)))
    elif kind == "weighted":
        def body():
            return _balanced(15, _ERR_THRESHOLDS, lambda: Leaf(WEIGHTED))
    else:
        raise ValueError("unknown fixed tree %r" % kind)
    # first channel apart from the rest
    return MaTree(Decision(0, 0, body(), body()))
