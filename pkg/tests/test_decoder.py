import numpy as np
import pytest

import oracles
from taptype.clustering import ClusterConfig
from taptype.decoder import (
    BeamConfig,
    Candidate,
    EngineConfig,
    LexiconTrie,
    TypingEngine,
    autocorrect_decision,
    decode,
)
from taptype.langmodel import build_lm
from taptype.layout import TouchPoint, key_for_char
from taptype.spatial import SpatialParams, build_personalized_model
from taptype.touch_store import HistoryConfig


def center_touches(layout, word):
    return [
        TouchPoint(key_for_char(layout, c).center_x, key_for_char(layout, c).center_y)
        for c in word
    ]


def noisy_touches(layout, word, rng, noise=0.25):
    out = []
    for c in word:
        k = key_for_char(layout, c)
        out.append(
            TouchPoint(
                k.center_x + rng.normal(0, noise) * k.width,
                k.center_y + rng.normal(0, noise) * k.height,
            )
        )
    return out


@pytest.fixture()
def baseline(layout):
    return build_personalized_model(layout, {})


def test_center_perfect_cat(layout, baseline, mini_lm):
    result = decode(center_touches(layout, "cat"), baseline, mini_lm)
    assert result.ranked[0].word == "cat"
    assert result.literal.word == "cat"
    assert not result.autocorrected
    assert result.ranked[0].sm == 0.0


def test_boundary_flip_matches_exhaustive(layout, baseline):
    # "cat" vs "car": flip decided by lexicon counts when the last touch sits
    # on the r/t boundary (equal spatial cost on both keys).
    r = key_for_char(layout, "r")
    t = key_for_char(layout, "t")
    boundary_x = (r.center_x + t.center_x) / 2.0
    touches = center_touches(layout, "ca") + [TouchPoint(boundary_x, t.center_y)]
    for counts, expected in [((100, 5), "car"), ((5, 100), "cat")]:
        lm, _ = build_lm(f"car\t{counts[0]}\ncat\t{counts[1]}\n")
        result = decode(touches, baseline, lm)
        assert result.ranked[0].word == expected
        params = SpatialParams()
        costs = baseline.cost_matrix(
            np.array([[p.x, p.y] for p in touches]), params
        ).tolist()
        lit_cost = -result.literal.sm
        ranked = oracles.exhaustive_decode(
            costs, result.literal.word, lit_cost, lm, baseline.char_index, params, 1
        )
        assert result.ranked[0].word == ranked[0][0]


def test_insertion_edit_respects_max_edits(layout, baseline):
    lm, _ = build_lm("cats\t10\n")
    k = key_for_char(layout, "q")
    touches = center_touches(layout, "cat") + [
        TouchPoint(k.center_x, k.center_y),
        TouchPoint(*_key_xy(layout, "s")),
    ]
    with_edit = decode(touches, baseline, lm, beam=BeamConfig(max_edits=1))
    assert "cats" in [c.word for c in with_edit.ranked]
    cats = next(c for c in with_edit.ranked if c.word == "cats")
    assert cats.edit_count == 1
    without = decode(touches, baseline, lm, beam=BeamConfig(max_edits=0))
    assert "cats" not in [c.word for c in without.ranked]


def _key_xy(layout, c):
    k = key_for_char(layout, c)
    return k.center_x, k.center_y


def test_deletion_edit(layout, baseline):
    lm, _ = build_lm("cats\t10\n")
    touches = center_touches(layout, "cat")  # user skipped the final 's'
    result = decode(touches, baseline, lm, beam=BeamConfig(max_edits=1))
    words = [c.word for c in result.ranked]
    assert "cats" in words
    cats = next(c for c in result.ranked if c.word == "cats")
    assert cats.sm == pytest.approx(-SpatialParams().deletion_cost)


def test_transposition_edit(layout, baseline):
    lm, _ = build_lm("the\t100\n")
    touches = center_touches(layout, "teh")
    result = decode(touches, baseline, lm, beam=BeamConfig(max_edits=1))
    the = next(c for c in result.ranked if c.word == "the")
    assert the.edit_count == 1
    assert the.sm == pytest.approx(-SpatialParams().transposition_cost)
    assert result.autocorrected
    assert result.committed.word == "the"


def test_autocorrect_strict_inequality():
    lit = Candidate("abc", -1.0, -2.0)
    tied = Candidate("abd", -1.0, -2.0)
    assert autocorrect_decision(lit, tied) is False
    better = Candidate("abd", -0.5, -2.0)
    assert autocorrect_decision(lit, better) is True


def test_autocorrect_same_word():
    lit = Candidate("abc", -3.0, -2.0)
    top = Candidate("abc", -1.0, -2.0)
    assert autocorrect_decision(lit, top) is False


def test_autocorrect_length_gate():
    lit = Candidate("a", -5.0, -2.0)
    top = Candidate("i", -0.1, -0.5)
    assert autocorrect_decision(lit, top) is False
    assert autocorrect_decision(Candidate("aa", -5.0, -2.0), Candidate("ab", -0.1, -0.5))


def test_autocorrect_oov_literal(layout, baseline, lm_small):
    # Touches on 'thw' (OOV literal): in-vocab 'the' wins on total.
    touches = center_touches(layout, "thw")
    result = decode(touches, baseline, lm_small)
    assert result.literal.word == "thw"
    assert result.ranked[0].word == "the"
    assert result.autocorrected == (result.ranked[0].total > result.literal.total)
    assert result.autocorrected


def test_literal_always_present(layout, baseline, lm_small):
    rng = np.random.default_rng(8)
    for _ in range(50):
        touches = [
            TouchPoint(float(rng.uniform(0, 400)), float(rng.uniform(0, 180)))
            for _ in range(int(rng.integers(1, 8)))
        ]
        result = decode(touches, baseline, lm_small)
        assert result.literal is not None
        assert any(c.word == result.literal.word for c in result.ranked) or (
            result.literal.total <= result.ranked[-1].total
        )


def test_score_decomposition(layout, baseline, lm_small):
    """Every candidate's sm replays exactly from its own step records, never
    beats the optimal alignment, and the winner's sm is exactly optimal."""
    rng = np.random.default_rng(9)
    params = SpatialParams()
    for _ in range(30):
        word = "their"
        touches = noisy_touches(layout, word, rng)
        result = decode(touches, baseline, lm_small, params)
        costs = baseline.cost_matrix(np.array([[t.x, t.y] for t in touches]), params).tolist()
        for cand in result.ranked:
            assert -cand.sm == cand.replay_cost(costs, params)
            assert cand.total == cand.sm + cand.lm
            best = oracles.word_spatial_cost(cand.word, costs, baseline.char_index, params, 1)
            if cand.word == result.literal.word:
                continue  # the literal may keep its diagonal score
            assert best is not None
            assert -cand.sm >= best[0] - 1e-9
        top = result.ranked[0]
        if top.word != result.literal.word:
            best = oracles.word_spatial_cost(top.word, costs, baseline.char_index, params, 1)
            assert -top.sm == pytest.approx(best[0], abs=1e-9)


def test_oracle_equivalence_sample(layout, baseline, lm_small):
    """decode top-1 equals the exhaustive argmax (small version; the full
    1000-sequence run lives in the acceptance suite)."""
    rng = np.random.default_rng(10)
    params = SpatialParams()
    words = sorted(lm_small.lexicon.counts)
    for trial in range(100):
        word = words[int(rng.integers(len(words)))]
        touches = noisy_touches(layout, word, rng, noise=0.3)
        result = decode(touches, baseline, lm_small, params)
        costs = baseline.cost_matrix(np.array([[t.x, t.y] for t in touches]), params).tolist()
        expected = oracles.exhaustive_decode(
            costs, result.literal.word, -result.literal.sm, lm_small,
            baseline.char_index, params, 1,
        )
        assert result.ranked[0].word == expected[0][0], (trial, word)
        assert result.ranked[0].total == pytest.approx(expected[0][1], abs=1e-9)


def test_personalization_is_score_only(layout, lm_small):
    """With zero offsets and covariance off, results are bit-identical to a
    decoder with no personalization plumbing at all."""
    from taptype.decoder import _decode_from_costs, _nearest_key_indices

    baseline = build_personalized_model(layout, {})
    params = SpatialParams()
    beam = BeamConfig()
    trie = LexiconTrie(lm_small, baseline.char_index)
    rng = np.random.default_rng(13)
    denom = 2.0 * params.sigma0 * params.sigma0
    for _ in range(50):
        touches = [
            TouchPoint(float(rng.uniform(0, 400)), float(rng.uniform(0, 180)))
            for _ in range(int(rng.integers(1, 7)))
        ]
        via_model = decode(touches, baseline, lm_small, params, beam, trie)
        # Plain Gaussian costs straight from the layout geometry.
        plain = []
        for t in touches:
            row = []
            for key in layout.keys:
                dx = (t.x - key.center_x) / key.width
                dy = (t.y - key.center_y) / key.height
                row.append(min((dx * dx + dy * dy) / denom, params.substitution_cost))
            plain.append(row)
        lit = _nearest_key_indices(baseline, np.array([[t.x, t.y] for t in touches]))
        via_plain = _decode_from_costs(plain, lit, baseline, lm_small, params, beam, trie)
        assert via_model.literal == via_plain.literal
        assert via_model.ranked == via_plain.ranked
        assert via_model.autocorrected == via_plain.autocorrected


def test_commit_trains_aligned_touches(layout, lm_small):
    engine = TypingEngine(EngineConfig(), layout, lm_small)
    touches = center_touches(layout, "hello")
    summary = engine.commit("hello", touches)
    assert summary.trained == 5
    assert engine.history.total_touches == 5
    stats = engine.history.aggregate()
    assert stats["h"].n == 1 and stats["l"].n == 2


def test_commit_excludes_edited_positions(layout, lm_small):
    engine = TypingEngine(EngineConfig(), layout, lm_small)
    # Word has one character more than touches: the deletion position is
    # excluded, remaining characters train.
    touches = center_touches(layout, "cat")
    summary = engine.commit("cats", touches)
    assert summary.trained == 3
    assert engine.history.total_touches == 3


def test_commit_excludes_inserted_touch(layout, lm_small):
    engine = TypingEngine(EngineConfig(), layout, lm_small)
    # A stray touch in the middle: the spurious position must not train.
    q = key_for_char(layout, "q")
    touches = center_touches(layout, "ca") + [TouchPoint(q.center_x, q.center_y)]
    touches += center_touches(layout, "t")
    summary = engine.commit("cat", touches)
    assert summary.trained == 3
    stats = engine.history.aggregate()
    assert "q" not in stats


def test_commit_infeasible_alignment_trains_nothing(layout, lm_small):
    engine = TypingEngine(EngineConfig(), layout, lm_small)
    touches = center_touches(layout, "a")
    summary = engine.commit("asdfgh", touches)  # needs 5 edits, budget is 1
    assert summary.trained == 0
    assert engine.history.total_touches == 0


def test_rebuild_cadence_on_commit_count(layout, lm_small):
    config = EngineConfig(rebuild_every=5, history=HistoryConfig(800, 4))
    engine = TypingEngine(config, layout, lm_small)
    rebuilds = []
    for i in range(11):
        s = engine.commit("the", center_touches(layout, "the"))
        rebuilds.append(s.rebuilt)
    assert rebuilds[4] and rebuilds[9]
    assert sum(rebuilds) == 2


def test_rebuild_on_bucket_rotation(layout, lm_small):
    config = EngineConfig(rebuild_every=1000, history=HistoryConfig(8, 2))
    engine = TypingEngine(config, layout, lm_small)
    saw_rotation_rebuild = False
    for _ in range(6):
        s = engine.commit("the", center_touches(layout, "the"))
        saw_rotation_rebuild = saw_rotation_rebuild or s.rebuilt
    assert saw_rotation_rebuild


def test_commit_learns_constant_offset(layout, lm_small):
    config = EngineConfig(
        rebuild_every=10, history=HistoryConfig(800, 4), clusters=ClusterConfig(1)
    )
    engine = TypingEngine(config, layout, lm_small)
    for _ in range(20):
        touches = [
            TouchPoint(
                key_for_char(layout, c).center_x + 0.25 * key_for_char(layout, c).width,
                key_for_char(layout, c).center_y - 0.125 * key_for_char(layout, c).height,
            )
            for c in "their"
        ]
        engine.commit("their", touches)
    off = engine.model.offset_for_char("t")
    assert (off.dx, off.dy) == (0.25, -0.125)


def test_decode_empty_raises(layout, baseline, lm_small):
    with pytest.raises(ValueError):
        decode([], baseline, lm_small)


def test_ranked_sorted_desc(layout, baseline, lm_small):
    rng = np.random.default_rng(14)
    touches = noisy_touches(layout, "there", rng)
    result = decode(touches, baseline, lm_small)
    totals = [c.total for c in result.ranked]
    assert totals == sorted(totals, reverse=True)
