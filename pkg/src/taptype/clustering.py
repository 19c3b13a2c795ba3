"""Greedy decision-tree partition of the keyboard into rectangular key clusters.

Each split is an axis-aligned line between adjacent key-center coordinates.
A split is scored by the decrease in within-cluster sum of squared offset
error it buys, which reduces to f(C1) + f(C2) - f(C*) with
f(C) = n_C * (mean_dx^2 + mean_dy^2) over the pooled touch counts. The
best (leaf, split) pair is taken greedily until the target leaf count is
reached or no split helps.

Per-cluster candidate scoring uses sorted coordinates with prefix sums, so
every candidate is O(1) to evaluate and only freshly split clusters are
rescanned. For N keys and K clusters the construction is O(N log N + N K).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .layout import KeyboardLayout, Offset, Rect
from .touch_store import KeyStats, StatsMap

VERTICAL = "v"
HORIZONTAL = "h"


@dataclass(frozen=True)
class Split:
    axis: str  # VERTICAL separates by center_x, HORIZONTAL by center_y
    coordinate: float


@dataclass(frozen=True)
class Cluster:
    keys: frozenset[str]
    rect: Rect


@dataclass(frozen=True)
class ClusterConfig:
    max_clusters: int = 7

    def __post_init__(self):
        if self.max_clusters < 1:
            raise ValueError("max_clusters must be >= 1")


@dataclass
class ClusterNode:
    cluster: Cluster
    split: Split | None = None
    left: "ClusterNode | None" = None
    right: "ClusterNode | None" = None
    # Leaf payload: personalized offset and pooled statistics.
    offset: Offset = Offset(0.0, 0.0)
    pooled: KeyStats = field(default_factory=KeyStats)

    @property
    def is_leaf(self) -> bool:
        return self.split is None


@dataclass(frozen=True)
class GreedyStep:
    """One iteration of the greedy loop, recorded for oracle checks."""

    leaf_keys: frozenset[str]
    split: Split
    reduction: float


class ClusterTree:
    def __init__(self, root: ClusterNode, steps: list[GreedyStep], build_ops: int):
        self.root = root
        self.steps = steps
        self.build_ops = build_ops

    def leaves(self) -> list[ClusterNode]:
        out: list[ClusterNode] = []
        stack = [self.root]
        while stack:
            node = stack.pop()
            if node.is_leaf:
                out.append(node)
            else:
                stack.append(node.right)  # type: ignore[arg-type]
                stack.append(node.left)  # type: ignore[arg-type]
        return out

    def leaf_for_key(self, key: str) -> ClusterNode:
        node = self.root
        while not node.is_leaf:
            node = node.left if key in node.left.cluster.keys else node.right  # type: ignore[union-attr]
        if key not in node.cluster.keys:
            raise KeyError(f"key {key!r} not covered by cluster tree")
        return node

    def to_document(self) -> dict:
        def encode(node: ClusterNode) -> dict:
            rect = node.cluster.rect
            doc = {
                "keys": sorted(node.cluster.keys),
                "rect": [rect.x0, rect.y0, rect.x1, rect.y1],
            }
            if node.is_leaf:
                doc["offset"] = [node.offset.dx, node.offset.dy]
                doc["n"] = node.pooled.n
            else:
                doc["split"] = {"axis": node.split.axis, "coordinate": node.split.coordinate}
                doc["left"] = encode(node.left)
                doc["right"] = encode(node.right)
            return doc

        return encode(self.root)

    def dump_json(self) -> str:
        return json.dumps(self.to_document())


def pool_stats(stats: StatsMap, keys) -> KeyStats:
    """Sum the sufficient statistics of a set of keys."""
    pooled = KeyStats()
    for key in sorted(keys):
        ks = stats.get(key)
        if ks is not None:
            pooled.add_scaled(ks, 1.0)
    return pooled


def split_candidates(cluster: Cluster, layout: KeyboardLayout) -> list[Split]:
    """All axis-aligned lines strictly between adjacent key centers.

    Vertical candidates come first, each axis sorted ascending; coordinates
    are midpoints between adjacent distinct center coordinates.
    """
    xs = sorted({layout._by_char[k].center_x for k in cluster.keys})
    ys = sorted({layout._by_char[k].center_y for k in cluster.keys})
    out = [Split(VERTICAL, (a + b) / 2.0) for a, b in zip(xs, xs[1:])]
    out += [Split(HORIZONTAL, (a + b) / 2.0) for a, b in zip(ys, ys[1:])]
    return out


def _f_value(n: float, sdx: float, sdy: float) -> float:
    """f(C) = n * (E[dx]^2 + E[dy]^2), zero when the cluster has no touches."""
    if n <= 0.0:
        return 0.0
    mx = sdx / n
    my = sdy / n
    return n * (mx * mx + my * my)


def reduction(stats: StatsMap, cluster: Cluster, split: Split, layout: KeyboardLayout) -> float:
    """SSE decrease bought by a split: f(C1) + f(C2) - f(C*)."""
    coord_of = (lambda k: layout._by_char[k].center_x) if split.axis == VERTICAL else (
        lambda k: layout._by_char[k].center_y
    )
    low = [k for k in cluster.keys if coord_of(k) < split.coordinate]
    high = [k for k in cluster.keys if coord_of(k) > split.coordinate]
    p_low = pool_stats(stats, low)
    p_high = pool_stats(stats, high)
    p_all = pool_stats(stats, cluster.keys)
    return (
        _f_value(p_low.n, p_low.sum_dx, p_low.sum_dy)
        + _f_value(p_high.n, p_high.sum_dx, p_high.sum_dy)
        - _f_value(p_all.n, p_all.sum_dx, p_all.sum_dy)
    )


class _LeafState:
    """Working state for one leaf: sorted per-axis coordinates with prefix sums
    of (n, sum_dx, sum_dy), plus the leaf's cached best split."""

    __slots__ = (
        "node",
        "axis_coords",
        "axis_prefix",
        "total",
        "best_reduction",
        "best_split",
        "ops",
    )

    def __init__(self, node: ClusterNode, layout: KeyboardLayout, stats: StatsMap):
        self.node = node
        self.ops = 0
        keys = node.cluster.keys
        by_char = layout._by_char
        self.axis_coords: dict[str, list[float]] = {}
        self.axis_prefix: dict[str, list[tuple[float, float, float]]] = {}
        total_n = total_dx = total_dy = 0.0
        for key in sorted(keys):
            ks = stats.get(key)
            if ks is not None:
                total_n += ks.n
                total_dx += ks.sum_dx
                total_dy += ks.sum_dy
        self.total = (total_n, total_dx, total_dy)
        for axis in (VERTICAL, HORIZONTAL):
            groups: dict[float, list[str]] = {}
            for key in sorted(keys):
                k = by_char[key]
                coord = k.center_x if axis == VERTICAL else k.center_y
                groups.setdefault(coord, []).append(key)
            coords = sorted(groups)
            prefix = []
            acc_n = acc_dx = acc_dy = 0.0
            for coord in coords:
                for key in groups[coord]:
                    ks = stats.get(key)
                    if ks is not None:
                        acc_n += ks.n
                        acc_dx += ks.sum_dx
                        acc_dy += ks.sum_dy
                prefix.append((acc_n, acc_dx, acc_dy))
                self.ops += 1
            self.axis_coords[axis] = coords
            self.axis_prefix[axis] = prefix
        self._scan()

    def _scan(self) -> None:
        """Find the leaf's best candidate: vertical first, lower coordinates
        first, strictly-greater reduction to win: the canonical tie-break."""
        best_red = 0.0
        best_split: Split | None = None
        tot_n, tot_dx, tot_dy = self.total
        f_total = _f_value(tot_n, tot_dx, tot_dy)
        for axis in (VERTICAL, HORIZONTAL):
            coords = self.axis_coords[axis]
            prefix = self.axis_prefix[axis]
            for i in range(len(coords) - 1):
                n1, dx1, dy1 = prefix[i]
                red = (
                    _f_value(n1, dx1, dy1)
                    + _f_value(tot_n - n1, tot_dx - dx1, tot_dy - dy1)
                    - f_total
                )
                self.ops += 1
                if red > best_red:
                    best_red = red
                    best_split = Split(axis, (coords[i] + coords[i + 1]) / 2.0)
        self.best_reduction = best_red
        self.best_split = best_split


def build_cluster_tree(
    layout: KeyboardLayout,
    stats: StatsMap,
    config: ClusterConfig | None = None,
) -> ClusterTree:
    """Greedy Algorithm-1 construction over the layout's letter keys."""
    config = config or ClusterConfig()
    eligible = frozenset(k.char for k in layout.letter_keys())
    bounds = layout.bounds
    root = ClusterNode(cluster=Cluster(eligible, bounds))
    state = _LeafState(root, layout, stats)
    leaf_states = [state]
    steps: list[GreedyStep] = []
    ops = state.ops

    while len(leaf_states) < config.max_clusters and any(
        ls.total[0] >= 2.0 for ls in leaf_states
    ):
        best: _LeafState | None = None
        for ls in leaf_states:
            if ls.best_split is not None and (
                best is None or ls.best_reduction > best.best_reduction
            ):
                best = ls
        if best is None or best.best_reduction <= 0.0:
            break
        split = best.best_split
        node = best.node
        steps.append(GreedyStep(node.cluster.keys, split, best.best_reduction))
        left_cluster, right_cluster = _split_cluster(node.cluster, split, layout)
        node.split = split
        node.left = ClusterNode(cluster=left_cluster)
        node.right = ClusterNode(cluster=right_cluster)
        idx = leaf_states.index(best)
        left_state = _LeafState(node.left, layout, stats)
        right_state = _LeafState(node.right, layout, stats)
        ops += left_state.ops + right_state.ops
        leaf_states[idx : idx + 1] = [left_state, right_state]

    for ls in leaf_states:
        node = ls.node
        node.pooled = pool_stats(stats, node.cluster.keys)
        node.offset = Offset(*node.pooled.mean())
    return ClusterTree(root, steps, ops)


def _split_cluster(cluster: Cluster, split: Split, layout: KeyboardLayout) -> tuple[Cluster, Cluster]:
    rect = cluster.rect
    if split.axis == VERTICAL:
        low_rect = Rect(rect.x0, rect.y0, split.coordinate, rect.y1)
        high_rect = Rect(split.coordinate, rect.y0, rect.x1, rect.y1)
        coord_of = lambda k: layout._by_char[k].center_x
    else:
        low_rect = Rect(rect.x0, rect.y0, rect.x1, split.coordinate)
        high_rect = Rect(rect.x0, split.coordinate, rect.x1, rect.y1)
        coord_of = lambda k: layout._by_char[k].center_y
    low = frozenset(k for k in cluster.keys if coord_of(k) < split.coordinate)
    high = cluster.keys - low
    return Cluster(low, low_rect), Cluster(high, high_rect)


def offsets_for_keys(tree: ClusterTree) -> dict[str, Offset]:
    """Map every covered key to its leaf's personalized offset."""
    out: dict[str, Offset] = {}
    for leaf in tree.leaves():
        for key in leaf.cluster.keys:
            out[key] = leaf.offset
    return out
