"""Per-tap spatial scoring with personalized key centers.

The cost of explaining a touch with a key is the Gaussian exponent of the
personalized offset, clamped at the fixed substitution cost:

    min((dx^2 + dy^2) / (2 sigma^2), substitution_cost)

where (dx, dy) is the normalized offset minus the key's learned cluster
offset. With covariance enabled and a trustworthy cluster estimate, the
isotropic exponent is replaced by a scaled squared Mahalanobis distance
(sigma_global^2 / sigma0^2) * D^2 / 2, which degrades exactly to the
isotropic cost when the cluster covariance equals sigma_global^2 * I.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .clustering import ClusterConfig, ClusterTree, build_cluster_tree, offsets_for_keys, pool_stats
from .layout import Key, KeyboardLayout, Offset, TouchPoint, normalize_offset
from .touch_store import KeyStats, StatsMap

# Minimum pooled observations before a cluster covariance is trusted: keeps
# the prior weight in the (8 + N) denominator at or below one half.
MIN_COV_POINTS = 8.0
MAX_COV_CONDITION = 1e6


@dataclass(frozen=True)
class SpatialParams:
    sigma0: float = 0.55
    substitution_cost: float = 3.0
    insertion_cost: float = 3.5
    deletion_cost: float = 3.5
    transposition_cost: float = 3.5
    covariance_enabled: bool = False

    def __post_init__(self):
        if not (self.sigma0 > 0 and math.isfinite(self.sigma0)):
            raise ValueError("sigma0 must be positive and finite")
        for name in ("substitution_cost", "insertion_cost", "deletion_cost", "transposition_cost"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")

    def as_dict(self) -> dict:
        return {
            "sigma0": self.sigma0,
            "substitution_cost": self.substitution_cost,
            "insertion_cost": self.insertion_cost,
            "deletion_cost": self.deletion_cost,
            "transposition_cost": self.transposition_cost,
            "covariance_enabled": self.covariance_enabled,
        }


@dataclass
class ClusterGaussian:
    """Pooled per-cluster Gaussian: mean offset, count, and MAP covariance."""

    mu: tuple[float, float]
    n: float
    cov: np.ndarray | None
    cov_valid: bool


def gaussian_cost(adjusted: Offset, sigma: float) -> float:
    """Isotropic Gaussian exponent (dx^2 + dy^2) / (2 sigma^2)."""
    denom = 2.0 * sigma * sigma
    return (adjusted.dx * adjusted.dx + adjusted.dy * adjusted.dy) / denom


def covariance_map_estimate(stats: KeyStats) -> ClusterGaussian:
    """MAP covariance of a pooled cluster.

    The unnormalized scatter about the mean is shrunk toward its diagonal and
    damped by the conjugate prior: Sigma = ((1/N) diag(S) + S) / (8 + N).
    The estimate is flagged invalid (fallback) when the cluster is too small
    or the matrix is numerically unusable.
    """
    n = stats.n
    if n <= 0.0:
        return ClusterGaussian((0.0, 0.0), 0.0, None, False)
    mx, my = stats.mean()
    sxx = stats.sum_dx2 - n * mx * mx
    sxy = stats.sum_dxdy - n * mx * my
    syy = stats.sum_dy2 - n * my * my
    scatter = np.array([[sxx, sxy], [sxy, syy]], dtype=np.float64)
    sigma = (np.diag(np.diag(scatter)) / n + scatter) / (8.0 + n)
    valid = False
    if n >= MIN_COV_POINTS and np.all(np.isfinite(sigma)):
        evals = np.linalg.eigvalsh(sigma)
        valid = bool(evals[0] > 0.0 and evals[1] / evals[0] < MAX_COV_CONDITION)
    return ClusterGaussian((mx, my), n, sigma, valid)


def global_isotropic_scale(cov: np.ndarray | None, sigma0: float) -> float:
    """Reduce a whole-keyboard covariance to one isotropic scale.

    sigma_global^2 = sqrt(det(cov)), the geometric mean of the eigenvalues;
    falls back to sigma0 when the matrix is missing or not positive-definite.
    """
    if cov is None:
        return sigma0
    a = float(cov[0, 0])
    b = float(cov[0, 1])
    c = float(cov[1, 1])
    det = a * c - b * b
    if a > 0.0 and det > 0.0 and math.isfinite(det):
        return det**0.25
    return sigma0


class PersonalizedModel:
    """Immutable scoring model: cluster tree, per-key offsets, covariances.

    Precomputes flat per-key arrays so the decoder can score a whole touch
    sequence against every key in one vectorized pass.
    """

    def __init__(
        self,
        layout: KeyboardLayout,
        tree: ClusterTree,
        cluster_gaussians: list[ClusterGaussian],
        global_cov: np.ndarray | None,
        sigma_global: float,
    ):
        self.layout = layout
        self.tree = tree
        self.cluster_gaussians = cluster_gaussians
        self.global_cov = global_cov
        self.sigma_global = sigma_global
        self.key_offsets: dict[str, Offset] = offsets_for_keys(tree)

        leaves = tree.leaves()
        self.key_cluster: dict[str, int] = {}
        for i, leaf in enumerate(leaves):
            for char in leaf.cluster.keys:
                self.key_cluster[char] = i

        chars = [k.char for k in layout.keys]
        self.char_index = {c: i for i, c in enumerate(chars)}
        nk = len(chars)
        # Key indices in character order: argmin/argmax over rows in this
        # order break exact ties lexicographically.
        self.char_order = np.array(sorted(range(nk), key=lambda i: chars[i]), dtype=int)
        self._centers = np.array([[k.center_x, k.center_y] for k in layout.keys])
        self._dims = np.array([[k.width, k.height] for k in layout.keys])
        self._mu = np.zeros((nk, 2))
        self._inv_a = np.zeros(nk)
        self._inv_two_b = np.zeros(nk)
        self._inv_c = np.zeros(nk)
        self._cov_mask = np.zeros(nk, dtype=bool)
        for i, key in enumerate(layout.keys):
            ci = self.key_cluster.get(key.char)
            if ci is None:
                continue
            cg = cluster_gaussians[ci]
            self._mu[i, 0] = cg.mu[0]
            self._mu[i, 1] = cg.mu[1]
            if cg.cov_valid and cg.cov is not None:
                a = float(cg.cov[0, 0])
                b = float(cg.cov[0, 1])
                c = float(cg.cov[1, 1])
                det = a * c - b * b
                self._inv_a[i] = c / det
                self._inv_two_b[i] = 2.0 * (-b / det)
                self._inv_c[i] = a / det
                self._cov_mask[i] = True

    def cluster_for_char(self, char: str) -> ClusterGaussian | None:
        ci = self.key_cluster.get(char)
        return self.cluster_gaussians[ci] if ci is not None else None

    def offset_for_char(self, char: str) -> Offset:
        return self.key_offsets.get(char, Offset(0.0, 0.0))

    def cost_matrix(self, touches_xy: np.ndarray, params: SpatialParams) -> np.ndarray:
        """Clamped per-touch, per-key spatial costs: shape (T, num_keys)."""
        touches_xy = np.asarray(touches_xy, dtype=np.float64)
        v = (touches_xy[:, None, :] - self._centers) / self._dims - self._mu
        vx = v[..., 0]
        vy = v[..., 1]
        vx2 = vx * vx
        vy2 = vy * vy
        denom = 2.0 * params.sigma0 * params.sigma0
        term = (vx2 + vy2) / denom
        if params.covariance_enabled and self._cov_mask.any():
            sg = self.sigma_global
            half_scale = 0.5 * ((sg * sg) / (params.sigma0 * params.sigma0))
            quad = self._inv_a * vx2 + self._inv_two_b * (vx * vy) + self._inv_c * vy2
            term = np.where(self._cov_mask, half_scale * quad, term)
        return np.minimum(term, params.substitution_cost)

    def to_document(self) -> dict:
        offsets = {}
        centers = {}
        for key in self.layout.keys:
            off = self.offset_for_char(key.char)
            offsets[key.char] = [off.dx, off.dy]
            centers[key.char] = [
                key.center_x + off.dx * key.width,
                key.center_y + off.dy * key.height,
            ]
        clusters = []
        for leaf, cg in zip(self.tree.leaves(), self.cluster_gaussians):
            rect = leaf.cluster.rect
            clusters.append(
                {
                    "keys": sorted(leaf.cluster.keys),
                    "rect": [rect.x0, rect.y0, rect.x1, rect.y1],
                    "offset": [cg.mu[0], cg.mu[1]],
                    "n": cg.n,
                    "cov": cg.cov.tolist() if cg.cov is not None else None,
                    "cov_valid": cg.cov_valid,
                }
            )
        return {
            "offsets": offsets,
            "personalized_centers": centers,
            "clusters": clusters,
            "global_cov": self.global_cov.tolist() if self.global_cov is not None else None,
            "sigma_global": self.sigma_global,
            "tree": self.tree.to_document(),
        }


def mahalanobis_cost(
    adjusted: Offset,
    cg: ClusterGaussian,
    model: PersonalizedModel,
    params: SpatialParams,
) -> float:
    """Scaled squared Mahalanobis cost of a normalized offset for a cluster.

    `adjusted` is the raw normalized offset; the cluster mean is subtracted
    here. Falls back to the isotropic cost when the covariance is untrusted.
    """
    vx = adjusted.dx - cg.mu[0]
    vy = adjusted.dy - cg.mu[1]
    if not (cg.cov_valid and cg.cov is not None):
        return gaussian_cost(Offset(vx, vy), params.sigma0)
    a = float(cg.cov[0, 0])
    b = float(cg.cov[0, 1])
    c = float(cg.cov[1, 1])
    det = a * c - b * b
    if det <= 0.0:
        raise ValueError("valid cluster covariance must be positive-definite")
    inv_a = c / det
    inv_two_b = 2.0 * (-b / det)
    inv_c = a / det
    sg = model.sigma_global
    half_scale = 0.5 * ((sg * sg) / (params.sigma0 * params.sigma0))
    quad = inv_a * (vx * vx) + inv_two_b * (vx * vy) + inv_c * (vy * vy)
    return half_scale * quad


def key_cost(
    touch: TouchPoint,
    key: Key,
    model: PersonalizedModel,
    params: SpatialParams,
) -> float:
    """Clamped spatial cost of explaining one touch with one key."""
    raw = normalize_offset(key, touch)
    cg = model.cluster_for_char(key.char)
    if params.covariance_enabled and cg is not None and cg.cov_valid:
        term = mahalanobis_cost(raw, cg, model, params)
    else:
        mu = model.offset_for_char(key.char)
        term = gaussian_cost(Offset(raw.dx - mu.dx, raw.dy - mu.dy), params.sigma0)
    return min(term, params.substitution_cost)


def build_personalized_model(
    layout: KeyboardLayout,
    stats: StatsMap,
    config: ClusterConfig | None = None,
    params: SpatialParams | None = None,
) -> PersonalizedModel:
    """Cluster the keyboard on the given statistics and assemble the model."""
    params = params or SpatialParams()
    tree = build_cluster_tree(layout, stats, config)
    gaussians = [covariance_map_estimate(leaf.pooled) for leaf in tree.leaves()]
    eligible = [k.char for k in layout.letter_keys()]
    global_pool = pool_stats(stats, eligible)
    global_cg = covariance_map_estimate(global_pool)
    sigma_global = global_isotropic_scale(global_cg.cov, params.sigma0)
    return PersonalizedModel(layout, tree, gaussians, global_cg.cov, sigma_global)


def empty_model(layout: KeyboardLayout, params: SpatialParams | None = None) -> PersonalizedModel:
    """Baseline model with no personalization: zero offsets everywhere."""
    return build_personalized_model(layout, {}, ClusterConfig(1), params)
