import math

import pytest

from taptype.langmodel import (
    ALPHABET,
    DEFAULT_OOV_PENALTY,
    LexiconError,
    build_lm,
    char_backoff_logp,
    default_lm,
    parse_lexicon,
    word_logp,
)


def test_parse_basic():
    lex = parse_lexicon("the\t100\ncat\t5\n")
    assert lex.counts == {"the": 100, "cat": 5}
    assert lex.total == 105


def test_parse_duplicates_sum():
    lex = parse_lexicon("dog\t3\ndog\t4\n")
    assert lex.counts == {"dog": 7}


def test_parse_normalizes_case_and_punctuation():
    lex = parse_lexicon("Don't\t5\nHELLO\t2\n")
    assert lex.counts == {"dont": 5, "hello": 2}


def test_parse_errors():
    with pytest.raises(LexiconError, match="empty"):
        parse_lexicon("")
    with pytest.raises(LexiconError, match="word<TAB>count"):
        parse_lexicon("no-count-line\n")
    with pytest.raises(LexiconError, match="bad count"):
        parse_lexicon("word\tNaNcount\n")
    with pytest.raises(LexiconError, match="positive"):
        parse_lexicon("word\t0\n")


def test_uniform_lexicon_logp():
    text = "".join(f"w{chr(ord('a') + i // 26)}{chr(ord('a') + i % 26)}\t7\n" for i in range(100))
    lm, _ = build_lm(text)
    w = next(iter(lm.lexicon.counts))
    # 100 equal-count words: each is ~ -log(100) up to the unseen-mass dent.
    assert word_logp(lm, w) == pytest.approx(-math.log(100), abs=0.01)


def test_half_mass_word():
    lm, _ = build_lm("big\t50\nsmall\t25\ntiny\t25\n")
    assert word_logp(lm, "big") == pytest.approx(math.log(0.5), abs=0.02)


def test_oov_delegates_to_char_model():
    lm, char_lm = build_lm("the\t100\nthis\t60\nthat\t40\n")
    oov = "zzqz"
    assert not lm.in_vocab(oov)
    assert word_logp(lm, oov) == pytest.approx(char_lm.logp(oov) + DEFAULT_OOV_PENALTY)


def test_oov_scores_below_all_vocab_on_default_lexicon():
    lm = default_lm()
    floor = min(lm.word_logp(w) for w in lm.lexicon.counts)
    assert lm.word_logp("zzqz") < floor


def test_char_model_single_char():
    lm, char_lm = build_lm("ab\t10\nba\t5\n")
    got = char_backoff_logp(char_lm, "a")
    expected = char_lm.bigram_logp(None, "a") + char_lm.bigram_logp("a", None)
    assert got == pytest.approx(expected)


def test_char_model_prefers_english_bigrams():
    lm = default_lm()
    assert lm.char_lm.logp("the") > lm.char_lm.logp("tqe")


def test_char_model_nonpositive():
    lm = default_lm(500)
    for s in ("a", "the", "zzzz", "hello", "é", "qqq"):
        assert lm.char_lm.logp(s) <= 0.0


def test_char_model_rows_normalized():
    lm, char_lm = build_lm("the\t10\nquick\t3\nfox\t2\njumps\t1\n")
    for context in [None] + list(ALPHABET):
        total = sum(
            math.exp(char_lm.bigram_logp(context, nxt)) for nxt in list(ALPHABET) + [None]
        )
        assert total == pytest.approx(1.0, abs=1e-9)


def test_monotonicity_in_count():
    lm1, _ = build_lm("apple\t5\npear\t5\n")
    lm2, _ = build_lm("apple\t50\npear\t5\n")
    assert word_logp(lm2, "apple") > word_logp(lm1, "apple")


def test_vocab_plus_unseen_mass_sums_to_one():
    lm, _ = build_lm("a\t3\nbb\t2\nccc\t5\n")
    total = sum(math.exp(lm.word_logp(w)) for w in lm.lexicon.counts)
    unseen = 1.0 / (lm.lexicon.total + 1)
    assert total + unseen == pytest.approx(1.0, abs=1e-12)


def test_default_lexicon_shape():
    lm = default_lm()
    assert len(lm.lexicon) == 10_000
    assert all(w.islower() and w.isalpha() for w in lm.lexicon.counts)
    # 'the' carries the most mass in English prose.
    top = max(lm.lexicon.counts, key=lm.lexicon.counts.get)
    assert top == "the"


def test_top_restriction():
    lm = default_lm(200)
    assert len(lm.lexicon) == 200
    assert "the" in lm.lexicon.counts
