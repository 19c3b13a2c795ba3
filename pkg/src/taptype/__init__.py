"""Personalized touch-typing decoder.

Learns per-user, per-key-cluster touch offsets (and optionally covariances)
from bucketed on-device-style statistics, plugs them into a clamped Gaussian
spatial model, and decodes words with a noisy-channel beam search. Ships a
synthetic-typist experiment harness and a local demo service.
"""

from .clustering import (
    Cluster,
    ClusterConfig,
    ClusterTree,
    Split,
    build_cluster_tree,
    offsets_for_keys,
    reduction,
    split_candidates,
)
from .decoder import (
    BeamConfig,
    Candidate,
    CommitSummary,
    DecodeResult,
    EngineConfig,
    TypingEngine,
    autocorrect_decision,
    decode,
)
from .langmodel import (
    CharBackoffLM,
    Lexicon,
    LexiconError,
    WordLM,
    build_lm,
    default_lm,
    parse_lexicon,
)
from .layout import (
    Key,
    KeyboardLayout,
    LayoutError,
    Offset,
    TouchPoint,
    key_for_char,
    load_layout,
    nearest_key,
    normalize_offset,
    qwerty_layout,
)
from .simulator import Archetype, SessionMetrics, SyntheticUser, gen_user, run_session, sample_touch
from .spatial import (
    ClusterGaussian,
    PersonalizedModel,
    SpatialParams,
    build_personalized_model,
    covariance_map_estimate,
    gaussian_cost,
    global_isotropic_scale,
    key_cost,
    mahalanobis_cost,
)
from .touch_store import (
    HistoryConfig,
    KeyStats,
    ProfileError,
    ProfileVersionError,
    TouchHistory,
    load_profile,
    save_profile,
)

__version__ = "0.1.0"
