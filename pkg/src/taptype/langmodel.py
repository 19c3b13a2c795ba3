"""Unigram word model over a frequency lexicon, with a character-bigram
backup model for scoring out-of-vocabulary literals.

The word model deliberately ignores left context: every study here compares
spatial-model variants against each other with the language model held
fixed, so a unigram is sufficient and much easier to reason about.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

ALPHABET = "abcdefghijklmnopqrstuvwxyz"
_CHAR_INDEX = {c: i for i, c in enumerate(ALPHABET)}
_BEGIN = len(ALPHABET)  # context index for word start
_END = len(ALPHABET)  # next-symbol index for word end
_VOCAB = len(ALPHABET) + 1

# Log-probability charged per character that is not a lowercase letter.
OOV_CHAR_FLOOR = -16.0
# Added to the char-backoff score when the word model delegates an OOV word.
DEFAULT_OOV_PENALTY = -3.0


class LexiconError(ValueError):
    """Bad lexicon document."""


@dataclass(frozen=True)
class Lexicon:
    counts: dict[str, int]
    total: int

    def __contains__(self, word: str) -> bool:
        return word in self.counts

    def __len__(self) -> int:
        return len(self.counts)

    def top(self, n: int) -> "Lexicon":
        """Restrict to the n most frequent words (ties by word)."""
        best = sorted(self.counts.items(), key=lambda kv: (-kv[1], kv[0]))[:n]
        return Lexicon(dict(best), sum(c for _, c in best))


def _normalize_word(raw: str) -> str:
    return "".join(c for c in raw.lower() if c in _CHAR_INDEX)


def parse_lexicon(text: str) -> Lexicon:
    """Parse "word<TAB>count" lines; duplicate words sum their counts."""
    counts: dict[str, int] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise LexiconError(f"line {lineno}: expected 'word<TAB>count'")
        word = _normalize_word(parts[0])
        try:
            count = int(parts[1])
        except ValueError:
            raise LexiconError(f"line {lineno}: bad count {parts[1]!r}") from None
        if count <= 0:
            raise LexiconError(f"line {lineno}: count must be positive")
        if not word:
            continue  # nothing left after normalization
        counts[word] = counts.get(word, 0) + count
    if not counts:
        raise LexiconError("empty lexicon")
    return Lexicon(counts, sum(counts.values()))


class CharBackoffLM:
    """Character-bigram model with add-one smoothing, trained on the lexicon
    weighted by word counts. Begin/end of word are explicit events."""

    def __init__(self, lexicon: Lexicon):
        counts = [[0] * _VOCAB for _ in range(_VOCAB)]
        for word, c in lexicon.counts.items():
            ctx = _BEGIN
            for ch in word:
                nxt = _CHAR_INDEX[ch]
                counts[ctx][nxt] += c
                ctx = nxt
            counts[ctx][_END] += c
        self._logp = []
        for row in counts:
            row_total = sum(row) + _VOCAB
            self._logp.append([math.log((v + 1) / row_total) for v in row])

    def bigram_logp(self, context: str | None, nxt: str | None) -> float:
        """log p(next | context); None means word boundary on either side."""
        ctx = _BEGIN if context is None else _CHAR_INDEX[context]
        col = _END if nxt is None else _CHAR_INDEX[nxt]
        return self._logp[ctx][col]

    def logp(self, s: str) -> float:
        if not s:
            raise ValueError("cannot score an empty string")
        total = 0.0
        ctx = _BEGIN
        for ch in s:
            idx = _CHAR_INDEX.get(ch)
            if idx is None:
                total += OOV_CHAR_FLOOR
                ctx = _BEGIN
            else:
                total += self._logp[ctx][idx]
                ctx = idx
        total += self._logp[ctx][_END]
        return total


def char_backoff_logp(lm: "CharBackoffLM", s: str) -> float:
    return lm.logp(s)


class WordLM:
    """Unigram word log-probabilities with reserved unseen mass 1/(total+1).

    Out-of-vocabulary words delegate to the character backup model plus a
    fixed penalty, so any literal string can be scored.
    """

    def __init__(
        self,
        lexicon: Lexicon,
        char_lm: CharBackoffLM,
        oov_penalty: float = DEFAULT_OOV_PENALTY,
    ):
        self.lexicon = lexicon
        self.char_lm = char_lm
        self.oov_penalty = oov_penalty
        denom = lexicon.total + 1
        self._logp = {w: math.log(c / denom) for w, c in lexicon.counts.items()}

    def word_logp(self, word: str) -> float:
        logp = self._logp.get(word)
        if logp is not None:
            return logp
        return self.char_lm.logp(word) + self.oov_penalty

    def in_vocab(self, word: str) -> bool:
        return word in self._logp


def word_logp(lm: "WordLM", word: str) -> float:
    return lm.word_logp(word)


def build_lm(source: str | Lexicon, oov_penalty: float = DEFAULT_OOV_PENALTY) -> tuple[WordLM, CharBackoffLM]:
    """Build the word and character models from a lexicon document or Lexicon."""
    lexicon = parse_lexicon(source) if isinstance(source, str) else source
    char_lm = CharBackoffLM(lexicon)
    return WordLM(lexicon, char_lm, oov_penalty), char_lm


def default_lexicon_text() -> str:
    return resources.files("taptype.assets").joinpath("lexicon_en.txt").read_text()


@lru_cache(maxsize=4)
def default_lm(top_n: int | None = None) -> WordLM:
    """The shipped English test lexicon as a WordLM (cached)."""
    lexicon = parse_lexicon(default_lexicon_text())
    if top_n is not None:
        lexicon = lexicon.top(top_n)
    word_lm, _ = build_lm(lexicon)
    return word_lm
