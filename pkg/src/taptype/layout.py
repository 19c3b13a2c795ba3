"""Keyboard geometry: key rectangles, character lookup, and normalized touch offsets.

Coordinates are abstract pixels. Everything downstream works in offsets
normalized by key width/height, so the absolute scale never matters.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources


class LayoutError(ValueError):
    """Malformed or inconsistent layout document."""


@dataclass(frozen=True)
class TouchPoint:
    x: float
    y: float


@dataclass(frozen=True)
class Offset:
    """Touch position relative to a key center, in key-width/key-height units."""

    dx: float
    dy: float


@dataclass(frozen=True)
class Key:
    char: str
    center_x: float
    center_y: float
    width: float
    height: float

    @property
    def left(self) -> float:
        return self.center_x - self.width / 2.0

    @property
    def right(self) -> float:
        return self.center_x + self.width / 2.0

    @property
    def top(self) -> float:
        return self.center_y - self.height / 2.0

    @property
    def bottom(self) -> float:
        return self.center_y + self.height / 2.0

    def contains(self, x: float, y: float) -> bool:
        return self.left <= x <= self.right and self.top <= y <= self.bottom


@dataclass(frozen=True)
class Rect:
    x0: float
    y0: float
    x1: float
    y1: float

    def contains(self, x: float, y: float) -> bool:
        return self.x0 <= x <= self.x1 and self.y0 <= y <= self.y1


class KeyboardLayout:
    """Immutable collection of non-overlapping keys with unique character labels."""

    def __init__(self, keys: list[Key]):
        if not keys:
            raise LayoutError("layout has no keys")
        self.keys: tuple[Key, ...] = tuple(keys)
        self._by_char: dict[str, Key] = {}
        for key in self.keys:
            if key.char in self._by_char:
                raise LayoutError(f"duplicate character {key.char!r}")
            self._by_char[key.char] = key
        _validate_geometry(self.keys)
        self.bounds = Rect(
            min(k.left for k in self.keys),
            min(k.top for k in self.keys),
            max(k.right for k in self.keys),
            max(k.bottom for k in self.keys),
        )

    def __contains__(self, char: str) -> bool:
        return char in self._by_char

    def key(self, char: str) -> Key:
        return key_for_char(self, char)

    def __len__(self) -> int:
        return len(self.keys)

    @property
    def chars(self) -> list[str]:
        return [k.char for k in self.keys]

    def letter_keys(self) -> list[Key]:
        """Keys eligible for statistics and clustering: single-letter labels."""
        return [k for k in self.keys if len(k.char) == 1 and k.char.isalpha()]


def _validate_geometry(keys: tuple[Key, ...]) -> None:
    for key in keys:
        if not (key.width > 0 and key.height > 0):
            raise LayoutError(f"key {key.char!r} has non-positive dimensions")
        for v in (key.center_x, key.center_y, key.width, key.height):
            if not math.isfinite(v):
                raise LayoutError(f"key {key.char!r} has non-finite geometry")
    # Interiors must be pairwise disjoint; shared edges are fine.
    for i, a in enumerate(keys):
        for b in keys[i + 1 :]:
            if (
                a.left < b.right
                and b.left < a.right
                and a.top < b.bottom
                and b.top < a.bottom
            ):
                raise LayoutError(f"keys {a.char!r} and {b.char!r} overlap")


def load_layout(source: str | list) -> KeyboardLayout:
    """Build a layout from a JSON document: a list of {char, x, y, w, h} entries.

    (x, y) is the key center. Accepts the parsed list or the raw JSON text.
    """
    if isinstance(source, str):
        try:
            doc = json.loads(source)
        except json.JSONDecodeError as exc:
            raise LayoutError(f"layout document is not valid JSON: {exc}") from exc
    else:
        doc = source
    if not isinstance(doc, list):
        raise LayoutError("layout document must be a JSON list of key entries")
    keys = []
    for entry in doc:
        if not isinstance(entry, dict):
            raise LayoutError("layout entry must be an object")
        try:
            keys.append(
                Key(
                    char=str(entry["char"]),
                    center_x=float(entry["x"]),
                    center_y=float(entry["y"]),
                    width=float(entry["w"]),
                    height=float(entry["h"]),
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise LayoutError(f"bad layout entry {entry!r}: {exc}") from exc
    return KeyboardLayout(keys)


def qwerty_asset_text() -> str:
    """Raw JSON text of the built-in QWERTY layout asset."""
    return resources.files("taptype.assets").joinpath("qwerty.json").read_text()


def qwerty_layout() -> KeyboardLayout:
    """The built-in 26-letter QWERTY grid (10/9/7 rows, uniform key sizes)."""
    return load_layout(qwerty_asset_text())


def key_for_char(layout: KeyboardLayout, c: str) -> Key:
    try:
        return layout._by_char[c]
    except KeyError:
        raise LayoutError(f"character {c!r} not on layout") from None


def normalize_offset(key: Key, touch: TouchPoint) -> Offset:
    """Offset of a touch from the key center in key-dimension units."""
    return Offset(
        (touch.x - key.center_x) / key.width,
        (touch.y - key.center_y) / key.height,
    )


def normalized_distance_sq(key: Key, touch: TouchPoint) -> float:
    dx = (touch.x - key.center_x) / key.width
    dy = (touch.y - key.center_y) / key.height
    return dx * dx + dy * dy


def nearest_key(layout: KeyboardLayout, touch: TouchPoint) -> Key:
    """The key under a touch.

    A key whose rectangle contains the touch wins; otherwise the key with the
    smallest normalized distance. Ties break by character order.
    """
    containing = [k for k in layout.keys if k.contains(touch.x, touch.y)]
    if containing:
        return min(containing, key=lambda k: k.char)
    return min(layout.keys, key=lambda k: (normalized_distance_sq(k, touch), k.char))
