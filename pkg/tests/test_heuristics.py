import numpy as np
import pytest

from modcodec.heuristics.clustering import cluster_histograms, histogram_cost
from modcodec.heuristics.effort import effort_config, fixed_tree
from modcodec.heuristics.selection import choose_transforms, count_colors, rct_scores
from modcodec.heuristics.tree_learning import SampleSet, learn_tree
from modcodec.modular.channel import Channel
from modcodec.modular.predictors import GRADIENT, NUM_PREDICTORS
from modcodec.modular.tree import Decision
from modcodec.transforms.chain import Palette, Rct, Squeeze


# ---- clustering ------------------------------------------------------------------

def test_identical_histograms_share_one_cluster():
    h = np.tile([5, 3, 0, 9], (6, 1))
    assert set(cluster_histograms(h)) == {0}


def test_disjoint_heavy_histograms_stay_apart():
    a = np.zeros(32)
    b = np.zeros(32)
    a[:4] = 1000
    b[16:20] = 1000
    # merging costs a full extra bit per symbol, far more than one header
    apart = histogram_cost(a) + histogram_cost(b)
    merged = histogram_cost(a + b)
    assert merged > apart
    cmap = cluster_histograms(np.stack([a, b]))
    assert cmap[0] != cmap[1]


def test_similar_histograms_merge():
    rng = np.random.default_rng(0)
    base = rng.integers(20, 40, 16)
    h = np.stack([base + rng.integers(0, 2, 16) for _ in range(4)])
    assert len(set(cluster_histograms(h))) == 1


def test_cluster_cap():
    rng = np.random.default_rng(1)
    h = rng.integers(0, 5, (300, 8)) + 100 * np.eye(8, dtype=int)[rng.integers(0, 8, 300)]
    cmap = cluster_histograms(h, max_clusters=255)
    assert len(cmap) == 300 and max(cmap) + 1 <= 255
    small = cluster_histograms(h, max_clusters=3)
    assert max(small) + 1 <= 3


def test_empty_contexts_map_to_zero():
    h = np.array([[0, 0], [4, 1], [0, 0]])
    assert cluster_histograms(h) == [0, 0, 0]


# ---- tree learning ---------------------------------------------------------------

def _samples(tokens, props, raw=None):
    n = len(tokens)
    raw = np.zeros(n, np.int64) if raw is None else raw
    return SampleSet({k: np.asarray(v, np.int64) for k, v in props.items()},
                     {GRADIENT: np.asarray(tokens, np.int64)}, {GRADIENT: raw})


def test_single_residual_gives_single_leaf():
    cfg = effort_config(4)
    rng = np.random.default_rng(0)
    s = _samples(np.full(5000, 3), {k: rng.integers(-50, 50, 5000) for k in range(16)})
    tree = learn_tree(s, cfg)
    assert tree.num_nodes == 1


def test_two_clusters_split_on_x():
    cfg = effort_config(4)
    rng = np.random.default_rng(2)
    n = 20000
    x = rng.integers(0, 16, n)
    props = {k: rng.integers(-50, 50, n) for k in range(16)}
    props[3] = x
    tok = np.where(x > 9, rng.integers(8, 12, n), rng.integers(0, 4, n))
    tree = learn_tree(_samples(tok, props), cfg)
    root = tree.root
    assert isinstance(root, Decision)
    assert root.prop == 3 and root.threshold == 9


def test_learning_is_deterministic():
    cfg = effort_config(6)
    rng = np.random.default_rng(3)
    n = 3000
    props = {k: rng.integers(-30, 30, n) for k in range(16)}
    toks = {p: rng.integers(0, 10, n) for p in range(NUM_PREDICTORS)}
    toks[4] = np.where(props[7] > 0, 1, 6)
    raw = {p: np.zeros(n, np.int64) for p in range(NUM_PREDICTORS)}
    a = learn_tree(SampleSet(props, toks, raw), cfg)
    b = learn_tree(SampleSet(props, toks, raw), cfg)
    assert a.describe() == b.describe()
    assert a.root.prop == 7 and 4 in a.describe()["predictors"]


def test_learned_tree_is_valid_on_the_wire():
    from modcodec.bitio import BitReader, BitWriter
    from modcodec.modular.tree import read_tree, write_tree
    cfg = effort_config(4)
    rng = np.random.default_rng(4)
    n = 8000
    props = {k: rng.integers(-100, 100, n) for k in range(16)}
    tok = np.abs(props[9]) // 10 + rng.integers(0, 2, n)
    tree = learn_tree(_samples(tok, props), cfg)
    bw = BitWriter()
    write_tree(bw, tree)
    back = read_tree(BitReader(bw.getvalue()))
    assert back.describe() == tree.describe()


# ---- effort ladder ---------------------------------------------------------------

def test_effort_ladder():
    for e in (1, 2):
        cfg = effort_config(e)
        assert not cfg.learn_tree and cfg.predictors == (GRADIENT,)
    assert not effort_config(3).learn_tree
    for e in range(4, 10):
        assert effort_config(e).learn_tree
    assert len(effort_config(8).rct_candidates) == 42
    assert effort_config(4).rct_candidates == (0, 6, 10)
    with pytest.raises(ValueError):
        effort_config(10)
    for kind in ("single", "gradient", "weighted"):
        assert fixed_tree(kind).num_nodes >= 1


# ---- transform selection ---------------------------------------------------------

def test_four_color_logo_gets_palette():
    rng = np.random.default_rng(0)
    colors = np.array([[255, 0, 0], [0, 0, 0], [255, 255, 255], [0, 128, 255]])
    img = colors[rng.integers(0, 4, (40, 40))]
    chans = [Channel(img[:, :, k]) for k in range(3)]
    assert count_colors([c.data for c in chans]) == 4
    specs = choose_transforms(chans, 3, effort_config(7))
    assert len(specs) == 1 and isinstance(specs[0], Palette) and specs[0].num_colors == 4


def test_grayscale_gets_no_rct():
    g = np.add.outer(np.arange(64), np.arange(64)) * 2 % 256
    g = g + np.random.default_rng(1).integers(0, 40, g.shape)
    specs = choose_transforms([Channel(g)], 1, effort_config(9))
    assert not any(isinstance(s, Rct) for s in specs)


def test_correlated_rgb_gets_rct_and_squeeze_only_on_request():
    rng = np.random.default_rng(2)
    base = np.add.outer(np.arange(64), np.arange(64)) * 3 + rng.integers(0, 12, (64, 64))
    img = [base, base + rng.integers(-2, 3, base.shape), base + 5]
    chans = [Channel(np.clip(c, 0, 255)) for c in img]
    scores = rct_scores([c.data for c in chans], range(42))
    assert min(scores.values()) < scores[0]
    specs = choose_transforms(chans, 3, effort_config(8))
    assert isinstance(specs[0], Rct) and specs[0].rct_type != 0
    assert not any(isinstance(s, Squeeze) for s in specs)
    prog = choose_transforms(chans, 3, effort_config(8), progressive=True)
    assert isinstance(prog[-1], Squeeze)
