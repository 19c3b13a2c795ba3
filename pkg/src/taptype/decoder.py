"""Noisy-channel word decoding and the commit/adapt feedback loop.

A word candidate's score is SM + LM: the (negated) sum of per-touch spatial
costs plus the word's log-probability. The search walks a lexicon trie with
one beam layer per consumed touch; insertion, deletion, and transposition
transitions add their fixed costs and count against an edit budget. The
explicitly-tapped literal is always scored and always survives.

Beam layers are pruned on cost minus the best language-model score still
reachable below the trie node within the edit budget, so high-frequency
words are not starved by a few sloppy leading touches. Every pruned state
keeps an upper bound on what it could have scored; if any bound reaches the
winning total, the search reruns once with bound-based retention, making
the reported top candidate exact in all but pathological cases.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .clustering import ClusterConfig
from .langmodel import WordLM, default_lm
from .layout import KeyboardLayout, TouchPoint, key_for_char, normalize_offset, qwerty_layout
from .spatial import PersonalizedModel, SpatialParams, build_personalized_model
from .touch_store import HistoryConfig, TouchHistory

_INF = float("inf")


@dataclass(frozen=True)
class Candidate:
    word: str
    sm: float
    lm: float
    edit_count: int = 0
    # Step records behind sm, for re-scoring checks: ("s", touch, key),
    # ("i", touch), ("d", key), ("t", touch, key1, key2).
    path: tuple = field(default=(), repr=False)

    @property
    def total(self) -> float:
        return self.sm + self.lm

    def replay_cost(self, costs: list[list[float]], params) -> float:
        """Re-add this candidate's summands and edit costs in path order."""
        total = 0.0
        for step in self.path:
            op = step[0]
            if op == "s":
                total = total + costs[step[1]][step[2]]
            elif op == "i":
                total = total + params.insertion_cost
            elif op == "d":
                total = total + params.deletion_cost
            else:
                total = total + params.transposition_cost
                total = total + costs[step[1]][step[3]]
                total = total + costs[step[1] + 1][step[2]]
        return total


@dataclass(frozen=True)
class BeamConfig:
    beam_width: int = 16
    max_edits: int = 1

    def __post_init__(self):
        if self.beam_width < 1:
            raise ValueError("beam_width must be >= 1")
        if self.max_edits < 0:
            raise ValueError("max_edits must be >= 0")


@dataclass
class DecodeResult:
    literal: Candidate
    ranked: list[Candidate]
    autocorrected: bool

    @property
    def top(self) -> Candidate:
        return self.ranked[0] if self.ranked else self.literal

    @property
    def committed(self) -> Candidate:
        """The candidate a plain accept commits: top if autocorrected, else literal."""
        return self.ranked[0] if self.autocorrected else self.literal

    def to_document(self) -> dict:
        def enc(c: Candidate) -> dict:
            return {
                "word": c.word,
                "sm": c.sm,
                "lm": c.lm,
                "total": c.total,
                "edit_count": c.edit_count,
            }

        return {
            "literal": enc(self.literal),
            "ranked": [enc(c) for c in self.ranked],
            "autocorrected": self.autocorrected,
        }


class _TrieNode:
    __slots__ = ("children", "word", "serial", "min_rem", "max_rem", "lm_by_rem", "lm_win3")

    def __init__(self, serial: int):
        self.children: dict[int, _TrieNode] = {}
        self.word: str | None = None
        self.serial = serial
        self.min_rem = _INF  # shallowest completion below this node
        self.max_rem = -_INF  # deepest completion below this node
        # Best word log-probability among completions exactly `rem` edges
        # deeper. Lets the search bound a state by only the words it could
        # still reach within its edit budget.
        self.lm_by_rem: dict[int, float] = {}
        # lm_win3[rem] = best over depths rem-1..rem+1 (the max_edits=1 window).
        self.lm_win3: dict[int, float] = {}

    def best_reachable_lm(self, lo: int, hi: int) -> float:
        if lo == hi:
            return self.lm_by_rem.get(lo, -_INF)
        if hi - lo == 2:
            return self.lm_win3.get(lo + 1, -_INF)
        best = -_INF
        table = self.lm_by_rem
        for rem in range(max(lo, int(self.min_rem)), min(hi, int(self.max_rem)) + 1):
            v = table.get(rem)
            if v is not None and v > best:
                best = v
        return best


class LexiconTrie:
    """Lexicon laid out over key indices, annotated per node with the best
    word log-probability at each remaining depth."""

    def __init__(self, lm: WordLM, char_index: dict[str, int]):
        counter = itertools.count()
        self.root = _TrieNode(next(counter))
        self.size = 0
        for word in sorted(lm.lexicon.counts):
            indices = [char_index.get(c) for c in word]
            if any(i is None for i in indices):
                continue  # not typeable on this layout
            logp = lm.word_logp(word)
            node = self.root
            rem = len(indices)
            self._annotate(node, rem, logp)
            for idx in indices:
                child = node.children.get(idx)
                if child is None:
                    child = node.children[idx] = _TrieNode(next(counter))
                rem -= 1
                self._annotate(child, rem, logp)
                node = child
            node.word = word
            self.size += 1
        stack = [self.root]
        while stack:
            node = stack.pop()
            for rem, logp in node.lm_by_rem.items():
                for center in (rem - 1, rem, rem + 1):
                    cur = node.lm_win3.get(center)
                    if cur is None or logp > cur:
                        node.lm_win3[center] = logp
            stack.extend(node.children.values())

    @staticmethod
    def _annotate(node: _TrieNode, rem: int, logp: float) -> None:
        cur = node.lm_by_rem.get(rem)
        if cur is None or logp > cur:
            node.lm_by_rem[rem] = logp
        node.min_rem = min(node.min_rem, rem)
        node.max_rem = max(node.max_rem, rem)


def trie_for(lm: WordLM, char_index: dict[str, int]) -> LexiconTrie:
    """Build (or reuse) the trie for a lexicon/layout pair. Tries are
    immutable, so one per pair is shared across engines and sessions."""
    cache = getattr(lm, "_trie_cache", None)
    if cache is None:
        cache = lm._trie_cache = {}
    key = tuple(sorted(char_index.items()))
    trie = cache.get(key)
    if trie is None:
        trie = cache[key] = LexiconTrie(lm, char_index)
    return trie


def autocorrect_decision(literal: Candidate, top: Candidate | None, min_length: int = 2) -> bool:
    """Replace the literal with the top candidate?

    Only for words of at least `min_length` characters, only when the top
    candidate is a different word with a strictly higher total score.
    """
    if top is None or len(literal.word) < min_length:
        return False
    return top.word != literal.word and top.total > literal.total


def decode(
    touches: list[TouchPoint],
    model: PersonalizedModel,
    lm: WordLM,
    params: SpatialParams | None = None,
    beam: BeamConfig | None = None,
    trie: LexiconTrie | None = None,
) -> DecodeResult:
    """Decode one word's touch sequence against the lexicon."""
    if not touches:
        raise ValueError("decode needs at least one touch")
    params = params or SpatialParams()
    beam = beam or BeamConfig()
    if trie is None:
        trie = trie_for(lm, model.char_index)
    touches_xy = np.array([[t.x, t.y] for t in touches], dtype=np.float64)
    costs = model.cost_matrix(touches_xy, params).tolist()
    literal_indices = _nearest_key_indices(model, touches_xy)
    return _decode_from_costs(costs, literal_indices, model, lm, params, beam, trie)


def _nearest_key_indices(model: PersonalizedModel, touches_xy: np.ndarray) -> list[int]:
    """Vectorized nearest-key: containment first, then normalized distance,
    ties by character order (keys are scanned in character order)."""
    order = model.char_order
    raw = (touches_xy[:, None, :] - model._centers[order]) / model._dims[order]
    rx = raw[..., 0]
    ry = raw[..., 1]
    inside = (np.abs(rx) <= 0.5) & (np.abs(ry) <= 0.5)
    d2 = rx * rx + ry * ry
    out = []
    for row_inside, row_d2 in zip(inside, d2):
        if row_inside.any():
            out.append(int(order[int(np.argmax(row_inside))]))
        else:
            out.append(int(order[int(np.argmin(row_d2))]))
    return out


def _decode_from_costs(
    costs: list[list[float]],
    literal_indices: list[int],
    model: PersonalizedModel,
    lm: WordLM,
    params: SpatialParams,
    beam: BeamConfig,
    trie: LexiconTrie,
) -> DecodeResult:
    t_count = len(costs)

    literal_word = "".join(model.layout.keys[idx].char for idx in literal_indices)
    literal_cost = 0.0
    for i, idx in enumerate(literal_indices):
        literal_cost += costs[i][idx]
    literal_path = tuple(("s", i, idx) for i, idx in enumerate(literal_indices))
    literal = Candidate(
        literal_word, -literal_cost, lm.word_logp(literal_word), 0, literal_path
    )

    found, dropped_upper = _beam_pass(
        costs, params, beam.beam_width, beam.max_edits, trie, None
    )
    by_word: dict[str, Candidate] = {}
    for word, (cost, edits, link) in found.items():
        by_word[word] = Candidate(word, -cost, lm.word_logp(word), edits, _unchain(link))
    existing = by_word.get(literal_word)
    if existing is None or literal.total > existing.total:
        by_word[literal_word] = literal

    # Exactness certificate: if any pruned state's upper bound reaches the
    # current best total, a better completion may have been lost: rerun
    # once keeping everything that could still beat it.
    best_total = max(c.total for c in by_word.values())
    if dropped_upper is not None and dropped_upper >= best_total:
        retry_width = _RETRY_WIDTH if trie.size <= 500 else _RETRY_WIDTH_LARGE
        found2, _ = _beam_pass(
            costs, params, retry_width, beam.max_edits, trie, best_total
        )
        for word, (cost, edits, link) in found2.items():
            cand = Candidate(word, -cost, lm.word_logp(word), edits, _unchain(link))
            cur = by_word.get(word)
            if cur is None or cand.total > cur.total or (
                cand.total == cur.total and cand.edit_count < cur.edit_count
            ):
                by_word[word] = cand

    ranked = sorted(by_word.values(), key=lambda c: (-c.total, c.word))[: beam.beam_width]
    autocorrected = autocorrect_decision(literal, ranked[0] if ranked else None)
    return DecodeResult(literal=literal, ranked=ranked, autocorrected=autocorrected)


_RETRY_WIDTH = 512  # exhaustive on test-sized lexicons (<200 viable states/layer)
_RETRY_WIDTH_LARGE = 128  # keeps worst-case latency bounded on big lexicons


def _beam_pass(
    costs: list[list[float]],
    params: SpatialParams,
    beam_width: int,
    max_edits: int,
    trie: LexiconTrie,
    bound: float | None,
) -> tuple[dict[str, tuple[float, int, tuple | None]], float | None]:
    """One beam sweep. Returns completions and the highest upper bound among
    states dropped by width pruning (None when nothing was dropped).

    With `bound` set, states whose upper bound falls below it are discarded
    outright: the caller only cares about completions beating the bound.
    """
    t_count = len(costs)
    ins_cost = params.insertion_cost
    del_cost = params.deletion_cost
    tr_cost = params.transposition_cost

    # Spatial floor still to pay from touch i on: every remaining touch costs
    # at least its row minimum, whichever transition consumes it.
    suffix_floor = [0.0] * (t_count + 1)
    for i in range(t_count - 1, -1, -1):
        suffix_floor[i] = suffix_floor[i + 1] + min(costs[i])

    # Layer values are (cost, link): link is a cons chain of step records,
    # so every candidate can show exactly which summands built its score.
    # Steps: ("s", touch, key), ("i", touch), ("d", key), ("t", touch, k1, k2).
    layers: list[dict[tuple[_TrieNode, int], tuple[float, tuple | None]]] = [
        dict() for _ in range(t_count + 1)
    ]
    layers[0][(trie.root, 0)] = (0.0, None)
    found: dict[str, tuple[float, int, tuple | None]] = {}
    dropped_upper: float | None = None

    def prune(layer: dict, i: int) -> dict:
        nonlocal dropped_upper
        if bound is None and len(layer) <= beam_width:
            return layer  # nothing to squeeze out; dead states die on expansion
        remaining = t_count - i
        floor = suffix_floor[i]
        scored = []
        for state, entry in layer.items():
            node, edits = state
            slack = max_edits - edits
            if node.min_rem - remaining > slack or remaining - node.max_rem > slack:
                continue  # no completion fits the remaining touches and budget
            brl = node.best_reachable_lm(remaining - slack, remaining + slack)
            if brl == -_INF:
                continue
            upper = brl - (entry[0] + floor)
            if bound is not None and upper < bound:
                continue
            scored.append((entry[0] - brl, node.serial, edits, state, entry, upper))
        if len(scored) <= beam_width:
            return dict((s[3], s[4]) for s in scored)
        scored.sort(key=lambda s: (s[0], s[1], s[2]))
        for s in scored[beam_width:]:
            if dropped_upper is None or s[5] > dropped_upper:
                dropped_upper = s[5]
        return dict((s[3], s[4]) for s in scored[:beam_width])

    def deletion_closure(layer: dict) -> None:
        # Spend edits on word characters that got no touch.
        queue = list(layer.items())
        qi = 0
        while qi < len(queue):
            (node, edits), (cost, link) = queue[qi]
            qi += 1
            cur = layer.get((node, edits))
            if edits >= max_edits or (cur is not None and cost > cur[0]):
                continue
            ncost = cost + del_cost
            for idx, child in node.children.items():
                state = (child, edits + 1)
                cur = layer.get(state)
                if cur is None or ncost < cur[0]:
                    entry = (ncost, (("d", idx), link))
                    layer[state] = entry
                    queue.append((state, entry))

    for i in range(t_count + 1):
        layer = layers[i]
        if not layer:
            continue
        if i == t_count:
            if max_edits > 0:
                deletion_closure(layer)
            for (node, edits), (cost, link) in layer.items():
                if node.word is not None:
                    prev = found.get(node.word)
                    if prev is None or (cost, edits) < (prev[0], prev[1]):
                        found[node.word] = (cost, edits, link)
            break
        layer = prune(layer, i)
        if max_edits > 0:
            deletion_closure(layer)
            layer = prune(layer, i)
        layers[i] = layer
        row = costs[i]
        next_layer = layers[i + 1]
        # A transposition (crossed match of two touches, plus its fixed cost)
        # can only beat the straight two-substitution path to the same node
        # when g[c1] - g[c2] > cost, with g[k] = row[k] - row2[k]. Most
        # layers cannot satisfy that for any key pair, so gate it up front.
        tr_live = False
        if max_edits > 0 and i + 1 < t_count:
            row2 = costs[i + 1]
            g = [a - b for a, b in zip(row, row2)]
            g_min = min(g)
            tr_live = max(g) - g_min > tr_cost
        for (node, edits), (cost, link) in layer.items():
            # Substitution/match: consume this touch with a child character.
            for idx, child in node.children.items():
                ncost = cost + row[idx]
                state = (child, edits)
                cur = next_layer.get(state)
                if cur is None or ncost < cur[0]:
                    next_layer[state] = (ncost, (("s", i, idx), link))
            if edits < max_edits:
                # Insertion: the touch was spurious; no character consumed.
                ncost = cost + ins_cost
                state = (node, edits + 1)
                cur = next_layer.get(state)
                if cur is None or ncost < cur[0]:
                    next_layer[state] = (ncost, (("i", i), link))
                if tr_live:
                    after = layers[i + 2]
                    for idx1, child1 in node.children.items():
                        g1 = g[idx1]
                        if g1 - g_min <= tr_cost:
                            continue
                        for idx2, child2 in child1.children.items():
                            if g1 - g[idx2] <= tr_cost:
                                continue
                            ncost = cost + tr_cost + row[idx2] + row2[idx1]
                            state = (child2, edits + 1)
                            cur = after.get(state)
                            if cur is None or ncost < cur[0]:
                                after[state] = (ncost, (("t", i, idx1, idx2), link))
    return found, dropped_upper


def _unchain(link: tuple | None) -> tuple:
    steps = []
    while link is not None:
        step, link = link
        steps.append(step)
    steps.reverse()
    return tuple(steps)


def align_for_training(
    word: str,
    costs: list[list[float]],
    char_index: dict[str, int],
    params: SpatialParams,
    max_edits: int,
) -> list[tuple[int, int]] | None:
    """Best-alignment (char position, touch index) substitution pairs.

    Runs the same cost model as the search over the committed word; only
    plainly-matched positions are returned; characters and touches consumed
    by insert/delete/transpose edits are excluded from training. Returns
    None when no alignment fits within the edit budget.
    """
    w = len(word)
    t = len(costs)
    sub_cost = params.substitution_cost

    def pair_cost(j: int, i: int) -> float:
        idx = char_index.get(word[j])
        return costs[i][idx] if idx is not None else sub_cost

    # dp[j][i][e]: min cost aligning word[:j] with touches[:i] using exactly e edits.
    dp = [[[_INF] * (max_edits + 1) for _ in range(t + 1)] for _ in range(w + 1)]
    back: dict[tuple[int, int, int], tuple[str, tuple[int, int, int]]] = {}
    dp[0][0][0] = 0.0
    for j in range(w + 1):
        for i in range(t + 1):
            for e in range(max_edits + 1):
                cur = dp[j][i][e]
                if cur == _INF:
                    continue
                if j < w and i < t:
                    cand = cur + pair_cost(j, i)
                    if cand < dp[j + 1][i + 1][e]:
                        dp[j + 1][i + 1][e] = cand
                        back[(j + 1, i + 1, e)] = ("sub", (j, i, e))
                if e < max_edits:
                    if j < w:
                        cand = cur + params.deletion_cost
                        if cand < dp[j + 1][i][e + 1]:
                            dp[j + 1][i][e + 1] = cand
                            back[(j + 1, i, e + 1)] = ("del", (j, i, e))
                    if i < t:
                        cand = cur + params.insertion_cost
                        if cand < dp[j][i + 1][e + 1]:
                            dp[j][i + 1][e + 1] = cand
                            back[(j, i + 1, e + 1)] = ("ins", (j, i, e))
                    if j + 1 < w and i + 1 < t:
                        cand = cur + params.transposition_cost + pair_cost(j + 1, i) + pair_cost(j, i + 1)
                        if cand < dp[j + 2][i + 2][e + 1]:
                            dp[j + 2][i + 2][e + 1] = cand
                            back[(j + 2, i + 2, e + 1)] = ("tr", (j, i, e))
    best_e = None
    best = _INF
    for e in range(max_edits + 1):
        if dp[w][t][e] < best:
            best = dp[w][t][e]
            best_e = e
    if best_e is None:
        return None
    pairs = []
    state = (w, t, best_e)
    while state != (0, 0, 0):
        op, prev = back[state]
        if op == "sub":
            pairs.append((prev[0], prev[1]))
        state = prev
    pairs.reverse()
    return pairs


@dataclass
class CommitSummary:
    trained: int
    skipped: int
    rebuilt: bool


@dataclass
class EngineConfig:
    history: HistoryConfig = field(default_factory=HistoryConfig)
    clusters: ClusterConfig = field(default_factory=ClusterConfig)
    params: SpatialParams = field(default_factory=SpatialParams)
    beam: BeamConfig = field(default_factory=BeamConfig)
    personalized: bool = True
    rebuild_every: int = 50


class TypingEngine:
    """One user's decoding state: profile, model snapshot, and rebuild cadence.

    The model is rebuilt from aggregated statistics every `rebuild_every`
    commits or whenever the touch history rotates a bucket, whichever comes
    first. Decodes always read the current immutable snapshot.
    """

    def __init__(
        self,
        config: EngineConfig | None = None,
        layout: KeyboardLayout | None = None,
        lm: WordLM | None = None,
    ):
        self.config = config or EngineConfig()
        self.layout = layout or qwerty_layout()
        self.lm = lm or default_lm()
        self.history = TouchHistory(self.config.history)
        self.model = build_personalized_model(
            self.layout, {}, self.config.clusters, self.config.params
        )
        self.trie = trie_for(self.lm, self.model.char_index)
        self.commit_count = 0
        self.skipped_chars = 0
        self._commits_since_rebuild = 0

    @property
    def params(self) -> SpatialParams:
        return self.config.params

    def decode(self, touches: list[TouchPoint]) -> DecodeResult:
        return decode(
            touches,
            self.model,
            self.lm,
            self.config.params,
            self.config.beam,
            self.trie,
        )

    def commit(self, word: str, touches: list[TouchPoint]) -> CommitSummary:
        """Train on a committed word and rebuild the model when due."""
        trained = 0
        skipped = 0
        rotated = False
        if word and touches:
            touches_xy = np.array([[t.x, t.y] for t in touches], dtype=np.float64)
            costs = self.model.cost_matrix(touches_xy, self.config.params).tolist()
            pairs = align_for_training(
                word, costs, self.model.char_index, self.config.params, self.config.beam.max_edits
            )
            for j, i in pairs or []:
                char = word[j]
                if char not in self.layout:
                    skipped += 1
                    continue
                off = normalize_offset(key_for_char(self.layout, char), touches[i])
                rotated |= self.history.record(char, off)
                trained += 1
        self.commit_count += 1
        self._commits_since_rebuild += 1
        rebuilt = False
        if self.config.personalized and (
            self._commits_since_rebuild >= self.config.rebuild_every or rotated
        ):
            self.rebuild()
            rebuilt = True
        self.skipped_chars += skipped
        return CommitSummary(trained=trained, skipped=skipped, rebuilt=rebuilt)

    def rebuild(self) -> None:
        """Recompute clusters, offsets, and covariances from current history."""
        stats = self.history.aggregate() if self.config.personalized else {}
        self.model = build_personalized_model(
            self.layout, stats, self.config.clusters, self.config.params
        )
        self._commits_since_rebuild = 0

    def set_params(self, params: SpatialParams) -> bool:
        """Swap spatial parameters; rebuilds when the covariance flag flips."""
        rebuild_needed = params.covariance_enabled != self.config.params.covariance_enabled
        self.config.params = params
        if rebuild_needed:
            self.rebuild()
        return rebuild_needed
