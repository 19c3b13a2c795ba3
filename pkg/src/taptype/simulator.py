"""Synthetic typists: per-key Gaussian touch behavior and closed-loop sessions.

A synthetic user has a true mean offset and covariance per key; sessions
sample touches from those distributions, decode them, accept the decoder's
choice, and feed the commit back into adaptation. Everything is a pure
function of configuration and seeds.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

from .decoder import EngineConfig, TypingEngine
from .langmodel import WordLM, default_lm
from .layout import Key, KeyboardLayout, TouchPoint, key_for_char, qwerty_layout

MAX_TRUE_OFFSET = 0.75


@dataclass(frozen=True)
class Archetype:
    """Generator knobs for a population of synthetic users.

    Defaults produce users with a personal global shift, mild per-key
    variation, and moderately anisotropic touch noise; the population's
    grand mean offset stays near the origin.
    """

    name: str = "default"
    shift_range: float = 0.2  # per-axis global shift, uniform in +/- range
    key_jitter: float = 0.08  # per-key deviation from the global shift (std)
    sigma_range: tuple[float, float] = (0.15, 0.3)  # per-axis noise std range
    max_correlation: float = 0.3  # |rho| bound for touch noise
    regional_bias: float = 0.0  # extra leftward miss for keys in the left third
    insertion_rate: float = 0.0  # chance of a spurious extra touch per character
    omission_rate: float = 0.0  # chance of skipping a character's touch

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "shift_range": self.shift_range,
            "key_jitter": self.key_jitter,
            "sigma_range": list(self.sigma_range),
            "max_correlation": self.max_correlation,
            "regional_bias": self.regional_bias,
            "insertion_rate": self.insertion_rate,
            "omission_rate": self.omission_rate,
        }


@dataclass
class SyntheticUser:
    means: dict[str, np.ndarray]  # char -> true mean offset (dimensionless)
    covs: dict[str, np.ndarray]  # char -> true 2x2 covariance
    chols: dict[str, np.ndarray]  # Cholesky-like factors for sampling
    archetype: Archetype
    seed: int

    def mean_offset(self, char: str) -> np.ndarray:
        return self.means[char]


def _psd_factor(cov: np.ndarray) -> np.ndarray:
    """A factor L with L L^T = cov; tolerates singular (e.g. zero) matrices."""
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        evals, evecs = np.linalg.eigh(cov)
        return evecs @ np.diag(np.sqrt(np.clip(evals, 0.0, None)))


def gen_user(
    arch: Archetype,
    seed: int,
    layout: KeyboardLayout | None = None,
) -> SyntheticUser:
    """Deterministically generate one synthetic user from an archetype."""
    layout = layout or qwerty_layout()
    rng = np.random.default_rng(seed)
    shift = rng.uniform(-arch.shift_range, arch.shift_range, 2)
    left_edge = layout.bounds.x0 + (layout.bounds.x1 - layout.bounds.x0) / 3.0
    means: dict[str, np.ndarray] = {}
    covs: dict[str, np.ndarray] = {}
    chols: dict[str, np.ndarray] = {}
    for key in layout.letter_keys():
        mean = shift + rng.normal(0.0, arch.key_jitter, 2)
        if arch.regional_bias and key.center_x < left_edge:
            mean = mean + np.array([-arch.regional_bias, 0.0])
        mean = np.clip(mean, -MAX_TRUE_OFFSET, MAX_TRUE_OFFSET)
        sx, sy = rng.uniform(arch.sigma_range[0], arch.sigma_range[1], 2)
        rho = rng.uniform(-arch.max_correlation, arch.max_correlation)
        cov = np.array([[sx * sx, rho * sx * sy], [rho * sx * sy, sy * sy]])
        means[key.char] = mean
        covs[key.char] = cov
        chols[key.char] = _psd_factor(cov)
    return SyntheticUser(means, covs, chols, arch, seed)


def sample_touch(
    user: SyntheticUser,
    key: Key,
    rng: np.random.Generator,
    layout: KeyboardLayout,
) -> TouchPoint:
    """Draw one touch for a key from the user's true distribution."""
    off = user.means[key.char] + user.chols[key.char] @ rng.standard_normal(2)
    x = key.center_x + off[0] * key.width
    y = key.center_y + off[1] * key.height
    b = layout.bounds
    return TouchPoint(min(max(x, b.x0), b.x1), min(max(y, b.y0), b.y1))


def sample_word_touches(
    user: SyntheticUser,
    word: str,
    rng: np.random.Generator,
    layout: KeyboardLayout,
) -> list[TouchPoint]:
    """Touches for a whole word, with optional omission/insertion noise."""
    arch = user.archetype
    letters = layout.letter_keys()
    touches: list[TouchPoint] = []
    for char in word:
        if arch.omission_rate > 0.0 and rng.random() < arch.omission_rate:
            continue
        touches.append(sample_touch(user, key_for_char(layout, char), rng, layout))
        if arch.insertion_rate > 0.0 and rng.random() < arch.insertion_rate:
            stray = letters[int(rng.integers(len(letters)))]
            touches.append(sample_touch(user, stray, rng, layout))
    if not touches and word:
        # Never emit an empty sequence: omission noise may not erase a word.
        touches.append(sample_touch(user, key_for_char(layout, word[0]), rng, layout))
    return touches


@dataclass
class SessionMetrics:
    words: int = 0
    avg_spatial_cost: float = 0.0
    top1_error_rate: float = 0.0
    autocorrect_good: int = 0
    autocorrect_bad: int = 0
    touch_checksum: str = ""

    def as_dict(self) -> dict:
        return {
            "words": self.words,
            "avg_spatial_cost": self.avg_spatial_cost,
            "top1_error_rate": self.top1_error_rate,
            "autocorrect_good": self.autocorrect_good,
            "autocorrect_bad": self.autocorrect_bad,
            "touch_checksum": self.touch_checksum,
        }


@dataclass
class SessionTrace:
    """Optional per-touch record for plot emission (simulator-side only)."""

    rows: list[tuple[str, float, float]] = field(default_factory=list)  # (char, dx, dy)
    final_model: object = None  # PersonalizedModel snapshot at session end


def sample_prompts(lm: WordLM, count: int, rng: np.random.Generator) -> list[str]:
    """Draw prompt words from the lexicon proportionally to their counts."""
    words = sorted(lm.lexicon.counts)
    weights = np.array([lm.lexicon.counts[w] for w in words], dtype=np.float64)
    weights /= weights.sum()
    picks = rng.choice(len(words), size=count, p=weights)
    return [words[i] for i in picks]


def run_session(
    user: SyntheticUser,
    prompts: list[str],
    config: EngineConfig,
    seed: int,
    layout: KeyboardLayout | None = None,
    lm: WordLM | None = None,
    trace: SessionTrace | None = None,
) -> SessionMetrics:
    """Type all prompts through a fresh engine; accept the decoder's choice.

    The touch stream depends only on (user, prompts, seed), never on the
    engine configuration, so paired experiment arms see identical input.
    """
    layout = layout or qwerty_layout()
    lm = lm or default_lm()
    engine = TypingEngine(config, layout, lm)
    rng = np.random.default_rng(seed)
    checksum = hashlib.sha256()
    cost_sum = 0.0
    errors = 0
    ac_good = 0
    ac_bad = 0
    for prompt in prompts:
        touches = sample_word_touches(user, prompt, rng, layout)
        for t in touches:
            checksum.update(np.float64(t.x).tobytes())
            checksum.update(np.float64(t.y).tobytes())
        result = engine.decode(touches)
        committed = result.committed
        engine.commit(committed.word, touches)
        cost_sum += -committed.sm
        if committed.word != prompt:
            errors += 1
        if result.autocorrected:
            if committed.word == prompt:
                ac_good += 1
            else:
                ac_bad += 1
        if trace is not None:
            for char, dx, dy in _aligned_offsets(prompt, touches, layout):
                trace.rows.append((char, dx, dy))
    if trace is not None:
        engine.rebuild()
        trace.final_model = engine.model
    n = len(prompts)
    return SessionMetrics(
        words=n,
        avg_spatial_cost=cost_sum / n if n else 0.0,
        top1_error_rate=errors / n if n else 0.0,
        autocorrect_good=ac_good,
        autocorrect_bad=ac_bad,
        touch_checksum=checksum.hexdigest(),
    )


def _aligned_offsets(prompt: str, touches: list[TouchPoint], layout: KeyboardLayout):
    """Per-character offsets for tracing; only for cleanly aligned words."""
    if len(prompt) != len(touches):
        return
    for char, touch in zip(prompt, touches):
        if char in layout:
            key = key_for_char(layout, char)
            yield char, (touch.x - key.center_x) / key.width, (touch.y - key.center_y) / key.height
