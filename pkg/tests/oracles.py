"""Independent reference implementations used to check the production code.

These deliberately avoid the library's own data structures and algorithms:
brute-force pooling, exhaustive split scans, and a plain edit-alignment DP.
"""

from __future__ import annotations

import math


# --- clustering -------------------------------------------------------------


def pool(stats, keys):
    n = sdx = sdy = 0.0
    for k in sorted(keys):
        ks = stats.get(k)
        if ks is not None:
            n += ks.n
            sdx += ks.sum_dx
            sdy += ks.sum_dy
    return n, sdx, sdy


def f_value(stats, keys):
    n, sdx, sdy = pool(stats, keys)
    if n <= 0:
        return 0.0
    return n * ((sdx / n) ** 2 + (sdy / n) ** 2)


def sse(stats, keys):
    """Within-cluster sum of squared error about the pooled mean, both axes."""
    n = sdx = sdy = sdx2 = sdy2 = 0.0
    for k in sorted(keys):
        ks = stats.get(k)
        if ks is not None:
            n += ks.n
            sdx += ks.sum_dx
            sdy += ks.sum_dy
            sdx2 += ks.sum_dx2
            sdy2 += ks.sum_dy2
    if n <= 0:
        return 0.0
    return (sdx2 - sdx * sdx / n) + (sdy2 - sdy * sdy / n)


def partition_by_split(layout, keys, split):
    if split.axis == "v":
        low = {k for k in keys if layout.key(k).center_x < split.coordinate}
    else:
        low = {k for k in keys if layout.key(k).center_y < split.coordinate}
    return low, set(keys) - low


def reduction_direct(layout, stats, keys, split):
    """f(C1) + f(C2) - f(C*) by direct pooling."""
    low, high = partition_by_split(layout, keys, split)
    return f_value(stats, low) + f_value(stats, high) - f_value(stats, keys)


def sse_decrease(layout, stats, keys, split):
    """SSE(C*) - SSE(C1) - SSE(C2): the quantity the greedy step maximizes."""
    low, high = partition_by_split(layout, keys, split)
    return sse(stats, keys) - sse(stats, low) - sse(stats, high)


def candidate_splits(layout, keys):
    """Vertical (ascending) then horizontal (ascending) midpoint splits."""
    from taptype.clustering import Split

    xs = sorted({layout.key(k).center_x for k in keys})
    ys = sorted({layout.key(k).center_y for k in keys})
    out = [Split("v", (a + b) / 2.0) for a, b in zip(xs, xs[1:])]
    out += [Split("h", (a + b) / 2.0) for a, b in zip(ys, ys[1:])]
    return out


def best_split_scan(layout, stats, leaves):
    """Exhaustive greedy step over a list of leaf key-sets.

    Replicates the canonical tie-break: leaves in order, vertical before
    horizontal, lower coordinate first, strictly-greater reduction to win.
    Returns (leaf_index, split, reduction) or None.
    """
    best = None
    best_red = 0.0
    for li, keys in enumerate(leaves):
        for split in candidate_splits(layout, keys):
            red = reduction_direct(layout, stats, keys, split)
            if red > best_red:
                best_red = red
                best = (li, split, red)
    return best


def greedy_cluster_oracle(layout, stats, max_clusters):
    """Run the whole greedy loop exhaustively; returns the step list."""
    leaves = [set(k.char for k in layout.letter_keys())]
    steps = []
    while len(leaves) < max_clusters and any(pool(stats, ks)[0] >= 2.0 for ks in leaves):
        found = best_split_scan(layout, stats, leaves)
        if found is None:
            break
        li, split, red = found
        low, high = partition_by_split(layout, leaves[li], split)
        steps.append((frozenset(leaves[li]), split, red))
        leaves[li : li + 1] = [low, high]
    return steps, leaves


# --- decoding ---------------------------------------------------------------


def word_spatial_cost(word, costs, char_index, params, max_edits):
    """Min alignment cost of a word against per-touch key costs.

    'At most e edits' DP over (chars consumed, touches consumed); returns
    (cost, edits) or None when no alignment fits the budget.
    """
    w = len(word)
    t = len(costs)
    inf = math.inf
    idxs = [char_index.get(c) for c in word]

    def pc(j, i):
        idx = idxs[j]
        return costs[i][idx] if idx is not None else params.substitution_cost

    dp = {(0, 0, 0): 0.0}
    for e in range(max_edits + 1):
        for j in range(w + 1):
            for i in range(t + 1):
                cur = dp.get((j, i, e), inf)
                if cur is inf:
                    continue
                if j < w and i < t:
                    k = (j + 1, i + 1, e)
                    v = cur + pc(j, i)
                    if v < dp.get(k, inf):
                        dp[k] = v
                if e < max_edits:
                    if j < w:
                        k = (j + 1, i, e + 1)
                        v = cur + params.deletion_cost
                        if v < dp.get(k, inf):
                            dp[k] = v
                    if i < t:
                        k = (j, i + 1, e + 1)
                        v = cur + params.insertion_cost
                        if v < dp.get(k, inf):
                            dp[k] = v
                    if j + 1 < w and i + 1 < t:
                        k = (j + 2, i + 2, e + 1)
                        v = cur + params.transposition_cost + pc(j + 1, i) + pc(j, i + 1)
                        if v < dp.get(k, inf):
                            dp[k] = v
    best = None
    for e in range(max_edits + 1):
        v = dp.get((w, t, e))
        if v is not None and (best is None or v < best[0] or (v == best[0] and e < best[1])):
            best = (v, e)
    return best


def exhaustive_decode(costs, literal_word, literal_cost, lm, char_index, params, max_edits):
    """Score every lexicon word plus the literal; return candidates sorted by
    (total desc, word asc); the argmax decode must agree with."""
    totals = {}
    t = len(costs)
    for word in lm.lexicon.counts:
        if abs(len(word) - t) > max_edits:
            continue  # provably out of edit budget
        if any(c not in char_index for c in word):
            continue
        scored = word_spatial_cost(word, costs, char_index, params, max_edits)
        if scored is None:
            continue
        cost, _ = scored
        totals[word] = -cost + lm.word_logp(word)
    literal_total = -literal_cost + lm.word_logp(literal_word)
    if literal_word not in totals or literal_total > totals[literal_word]:
        totals[literal_word] = literal_total
    return sorted(totals.items(), key=lambda kv: (-kv[1], kv[0]))
