"""Greedy histogram clustering for context maps."""

import numpy as np

HEADER_BITS_PER_TOKEN = 7.0
HEADER_BITS_FIXED = 12.0


def histogram_cost(h):
    """Coded size of ``h`` under its own distribution plus a signaling estimate.

    Works on a single histogram or row-wise on a 2D array.
    """
    h = np.asarray(h, dtype=np.float64)
    tot = h.sum(axis=-1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        p = np.where(h > 0, h / np.maximum(tot, 1), 1.0)
        ent = -(h * np.log2(p)).sum(axis=-1)
    nz = (h > 0).sum(axis=-1)
    header = np.where(nz <= 1, 6.0, HEADER_BITS_FIXED + HEADER_BITS_PER_TOKEN * nz)
    return ent + header


def cluster_histograms(hists, max_clusters=255):
    """Return a context map merging similar histograms.

    Pairs are merged greedily while merging lowers the estimated total size;
    merging continues regardless once the cluster count exceeds the cap.
    Empty contexts join cluster 0.
    """
    hists = np.asarray(hists, dtype=np.float64)
    n = hists.shape[0]
    if n == 0:
        return []
    used = np.flatnonzero(hists.sum(axis=1) > 0)
    if used.size == 0:
        return [0] * n
    # start by collapsing exact duplicates
    groups = {}
    owner = {}
    for i in used.tolist():
        key = hists[i].tobytes()
        if key in groups:
            owner[i] = groups[key]
        else:
            groups[key] = i
            owner[i] = i
    reps = sorted(groups.values())
    members = {r: [i for i in used.tolist() if owner[i] == r] for r in reps}
    cur = np.array([hists[members[r]].sum(axis=0) for r in reps])
    cost = histogram_cost(cur)
    k = len(reps)
    alive = np.ones(k, dtype=bool)

    def pair_delta(i):
        merged = cur[i][None, :] + cur
        d = histogram_cost(merged) - cost[i] - cost
        d[i] = np.inf
        d[~alive] = np.inf
        return d

    delta = np.full((k, k), np.inf)
    for i in range(k):
        delta[i] = pair_delta(i)
    count = k
    while count > 1:
        flat = int(np.argmin(delta))
        i, j = divmod(flat, k)
        if not (delta[i, j] < 0 or count > max_clusters):
            break
        if i > j:
            i, j = j, i
        cur[i] += cur[j]
        cost[i] = histogram_cost(cur[i])
        members[reps[i]].extend(members[reps[j]])
        alive[j] = False
        delta[j, :] = np.inf
        delta[:, j] = np.inf
        row = pair_delta(i)
        delta[i] = row
        delta[:, i] = row
        count -= 1
    cmap = [0] * n
    label = 0
    order = sorted((min(members[reps[i]]), i) for i in range(k) if alive[i])
    for _, i in order:
        for ctx in members[reps[i]]:
            cmap[ctx] = label
        label += 1
    return cmap
