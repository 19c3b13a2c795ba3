"""On-device-style training store: bucketed Gaussian sufficient statistics per key.

Touches are never stored individually. Each bucket holds only per-key
aggregates of a contiguous block of touches, so ordering within a bucket
(and therefore the typed content) cannot be reconstructed. Old data
expires a whole bucket at a time.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .layout import Offset

PROFILE_VERSION = 1


class ProfileError(ValueError):
    """Bad profile document."""


class ProfileVersionError(ProfileError):
    """Profile document written by an incompatible version."""


@dataclass
class KeyStats:
    """Gaussian sufficient statistics: count, first and second moment sums.

    `n` is a float because decayed aggregation scales counts by bucket weights.
    """

    n: float = 0.0
    sum_dx: float = 0.0
    sum_dy: float = 0.0
    sum_dx2: float = 0.0
    sum_dy2: float = 0.0
    sum_dxdy: float = 0.0

    def add(self, dx: float, dy: float) -> None:
        self.n += 1.0
        self.sum_dx += dx
        self.sum_dy += dy
        self.sum_dx2 += dx * dx
        self.sum_dy2 += dy * dy
        self.sum_dxdy += dx * dy

    def add_scaled(self, other: "KeyStats", w: float) -> None:
        self.n += w * other.n
        self.sum_dx += w * other.sum_dx
        self.sum_dy += w * other.sum_dy
        self.sum_dx2 += w * other.sum_dx2
        self.sum_dy2 += w * other.sum_dy2
        self.sum_dxdy += w * other.sum_dxdy

    def mean(self) -> tuple[float, float]:
        if self.n <= 0:
            return (0.0, 0.0)
        return (self.sum_dx / self.n, self.sum_dy / self.n)

    def as_list(self) -> list[float]:
        return [self.n, self.sum_dx, self.sum_dy, self.sum_dx2, self.sum_dy2, self.sum_dxdy]

    @classmethod
    def from_list(cls, values: list) -> "KeyStats":
        if len(values) != 6:
            raise ProfileError(f"key stats need 6 values, got {len(values)}")
        vals = [float(v) for v in values]
        if not all(math.isfinite(v) for v in vals):
            raise ProfileError("non-finite key stats")
        if vals[0] < 0:
            raise ProfileError("negative touch count")
        return cls(*vals)


StatsMap = dict[str, KeyStats]


@dataclass(frozen=True)
class HistoryConfig:
    max_points: int = 800
    bucket_count: int = 4
    decay_rate: float = 0.0

    def __post_init__(self):
        if self.max_points <= 0 or self.bucket_count <= 0:
            raise ValueError("max_points and bucket_count must be positive")
        if self.max_points % self.bucket_count != 0:
            raise ValueError("max_points must be divisible by bucket_count")
        if self.decay_rate < 0:
            raise ValueError("decay_rate must be nonnegative")

    @property
    def bucket_capacity(self) -> int:
        return self.max_points // self.bucket_count

    def as_dict(self) -> dict:
        return {
            "max_points": self.max_points,
            "bucket_count": self.bucket_count,
            "decay_rate": self.decay_rate,
        }


@dataclass
class Bucket:
    seq: int
    stats: dict[str, KeyStats] = field(default_factory=dict)
    touch_count: int = 0

    def add(self, key: str, off: Offset) -> None:
        ks = self.stats.get(key)
        if ks is None:
            ks = self.stats[key] = KeyStats()
        ks.add(off.dx, off.dy)
        self.touch_count += 1


class TouchHistory:
    """Sliding window of touch statistics: at most `bucket_count` buckets of
    `bucket_capacity` touches each, newest bucket last and possibly partial."""

    def __init__(self, config: HistoryConfig | None = None):
        self.config = config or HistoryConfig()
        self.buckets: list[Bucket] = []
        self._next_seq = 0

    @property
    def total_touches(self) -> int:
        return sum(b.touch_count for b in self.buckets)

    def record(self, key: str, off: Offset) -> bool:
        """Fold one touch into the newest bucket.

        Returns True when the window rotated (a bucket was sealed and/or the
        oldest bucket expired); the engine uses this to schedule rebuilds.
        """
        if not (math.isfinite(off.dx) and math.isfinite(off.dy)):
            raise ValueError("offset must be finite")
        rotated = False
        if not self.buckets or self.buckets[-1].touch_count >= self.config.bucket_capacity:
            self.buckets.append(Bucket(seq=self._next_seq))
            self._next_seq += 1
            if len(self.buckets) > self.config.bucket_count:
                del self.buckets[0]
            rotated = self._next_seq > 1
        self.buckets[-1].add(key, off)
        return rotated

    def aggregate(self) -> StatsMap:
        """Decay-weighted per-key statistics over the whole window.

        Bucket i (1 = newest) gets weight max(1 - (i-1)*d, 0) applied to all
        six sufficient statistics.
        """
        d = self.config.decay_rate
        out: StatsMap = {}
        for age, bucket in enumerate(reversed(self.buckets)):
            w = 1.0 - age * d
            if w <= 0.0:
                continue
            for key, ks in bucket.stats.items():
                acc = out.get(key)
                if acc is None:
                    acc = out[key] = KeyStats()
                acc.add_scaled(ks, w)
        return out

    def to_document(self) -> dict:
        buckets = []
        for b in self.buckets:
            buckets.append(
                {
                    "seq": b.seq,
                    "keys": {k: ks.as_list() for k, ks in sorted(b.stats.items())},
                }
            )
        return {
            "version": PROFILE_VERSION,
            "config": self.config.as_dict(),
            "buckets": buckets,
        }

    @classmethod
    def from_document(cls, doc: dict) -> "TouchHistory":
        if not isinstance(doc, dict):
            raise ProfileError("profile document must be an object")
        version = doc.get("version")
        if version != PROFILE_VERSION:
            raise ProfileVersionError(f"unsupported profile version {version!r}")
        try:
            cfg = HistoryConfig(**doc["config"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ProfileError(f"bad profile config: {exc}") from exc
        history = cls(cfg)
        raw_buckets = doc.get("buckets")
        if not isinstance(raw_buckets, list):
            raise ProfileError("profile buckets must be a list")
        if len(raw_buckets) > cfg.bucket_count:
            raise ProfileError("profile has more buckets than the config allows")
        last_seq = None
        for i, raw in enumerate(raw_buckets):
            try:
                seq = int(raw["seq"])
                keys = raw["keys"]
            except (KeyError, TypeError) as exc:
                raise ProfileError(f"bad bucket entry: {exc}") from exc
            if last_seq is not None and seq <= last_seq:
                raise ProfileError("bucket sequence numbers must increase")
            last_seq = seq
            bucket = Bucket(seq=seq)
            for key, values in keys.items():
                ks = KeyStats.from_list(values)
                bucket.stats[key] = ks
                bucket.touch_count += int(ks.n)
            if bucket.touch_count > cfg.bucket_capacity:
                raise ProfileError("bucket exceeds capacity")
            if i < len(raw_buckets) - 1 and bucket.touch_count != cfg.bucket_capacity:
                raise ProfileError("only the newest bucket may be partial")
            history.buckets.append(bucket)
        history._next_seq = (last_seq + 1) if last_seq is not None else 0
        return history


def save_profile(history: TouchHistory) -> str:
    """Serialize a history to its JSON profile document."""
    return json.dumps(history.to_document())


def load_profile(text: str) -> TouchHistory:
    """Parse a JSON profile document back into a TouchHistory."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProfileError(f"corrupt profile document: {exc}") from exc
    return TouchHistory.from_document(doc)
