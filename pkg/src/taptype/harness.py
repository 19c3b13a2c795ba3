"""Paired-experiment runner: every arm replays the identical user population
and touch streams (same per-user seeds), so arm deltas isolate the engine
configuration change. Deltas are reported per user pair with a normal
approximation 95% confidence interval. Preset studies cover training-data
size and decay, bucket count, cluster count, sigma grid, and covariance
on/off, at desk scale.

Reports are deterministic: identical config and master seed produce
byte-identical output.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .clustering import ClusterConfig
from .decoder import BeamConfig, EngineConfig
from .langmodel import WordLM, default_lm
from .layout import KeyboardLayout, qwerty_layout
from .simulator import (
    Archetype,
    SessionMetrics,
    SessionTrace,
    gen_user,
    run_session,
    sample_prompts,
)
from .spatial import PersonalizedModel, SpatialParams
from .touch_store import HistoryConfig

Z_95 = 1.959963984540054  # two-sided 95% normal quantile


class ExperimentError(ValueError):
    """Invalid experiment configuration or violated pairing invariant."""


@dataclass(frozen=True)
class ArmSpec:
    name: str
    engine: EngineConfig

    def to_document(self) -> dict:
        e = self.engine
        return {
            "name": self.name,
            "history": e.history.as_dict(),
            "clusters": {"max_clusters": e.clusters.max_clusters},
            "params": e.params.as_dict(),
            "beam": {"beam_width": e.beam.beam_width, "max_edits": e.beam.max_edits},
            "personalized": e.personalized,
            "rebuild_every": e.rebuild_every,
        }

    @classmethod
    def from_document(cls, doc: dict) -> "ArmSpec":
        engine = EngineConfig(
            history=HistoryConfig(**doc.get("history", {})),
            clusters=ClusterConfig(**doc.get("clusters", {})),
            params=SpatialParams(**doc.get("params", {})),
            beam=BeamConfig(**doc.get("beam", {})),
            personalized=bool(doc.get("personalized", True)),
            rebuild_every=int(doc.get("rebuild_every", 50)),
        )
        return cls(name=str(doc["name"]), engine=engine)


@dataclass
class ExperimentConfig:
    name: str
    arms: list[ArmSpec]
    control: str
    users: int = 50
    prompts_per_user: int = 100
    archetypes: list[Archetype] = field(default_factory=lambda: [Archetype()])
    archetype_weights: list[float] | None = None
    master_seed: int = 0
    lexicon_top_n: int | None = 2000

    def validate(self) -> None:
        names = [a.name for a in self.arms]
        if len(set(names)) != len(names):
            raise ExperimentError("arm names must be unique")
        if self.control not in names:
            raise ExperimentError(f"control arm {self.control!r} not among arms")
        if len(self.arms) < 2:
            raise ExperimentError("need the control plus at least one experiment arm")
        if self.users < 2:
            raise ExperimentError("need at least 2 users for paired intervals")
        if self.archetype_weights is not None and len(self.archetype_weights) != len(
            self.archetypes
        ):
            raise ExperimentError("archetype_weights must match archetypes")

    def to_document(self) -> dict:
        return {
            "name": self.name,
            "arms": [a.to_document() for a in self.arms],
            "control": self.control,
            "users": self.users,
            "prompts_per_user": self.prompts_per_user,
            "archetypes": [a.as_dict() for a in self.archetypes],
            "archetype_weights": self.archetype_weights,
            "master_seed": self.master_seed,
            "lexicon_top_n": self.lexicon_top_n,
        }

    @classmethod
    def from_document(cls, doc: dict) -> "ExperimentConfig":
        archetypes = [
            Archetype(**{**a, "sigma_range": tuple(a.get("sigma_range", (0.15, 0.3)))})
            for a in doc.get("archetypes", [{}])
        ]
        return cls(
            name=str(doc.get("name", "experiment")),
            arms=[ArmSpec.from_document(a) for a in doc["arms"]],
            control=str(doc["control"]),
            users=int(doc.get("users", 50)),
            prompts_per_user=int(doc.get("prompts_per_user", 100)),
            archetypes=archetypes,
            archetype_weights=doc.get("archetype_weights"),
            master_seed=int(doc.get("master_seed", 0)),
            lexicon_top_n=doc.get("lexicon_top_n", 2000),
        )


@dataclass(frozen=True)
class PairedDelta:
    """Mean paired delta with a 95% normal-approximation interval."""

    mean: float
    ci_lo: float
    ci_hi: float
    n: int
    excluded: int
    p_value: float

    @property
    def width(self) -> float:
        return self.ci_hi - self.ci_lo

    def excludes_zero(self) -> bool:
        return self.ci_lo > 0.0 or self.ci_hi < 0.0


def _normal_p_two_sided(z: float) -> float:
    return 2.0 * (1.0 - 0.5 * (1.0 + math.erf(abs(z) / math.sqrt(2.0))))


def paired_delta(control: list[float], arm: list[float], relative: bool = True) -> PairedDelta:
    """Per-user paired delta of arm vs control.

    relative=True uses (arm - control) / control per pair; pairs where both
    sides are zero contribute 0, pairs where only the control is zero are
    excluded. relative=False uses plain differences (safe for rate metrics).
    """
    if len(control) != len(arm):
        raise ExperimentError("paired samples must have equal length")
    deltas = []
    excluded = 0
    for c, a in zip(control, arm):
        if relative:
            if c == 0.0:
                if a == 0.0:
                    deltas.append(0.0)
                else:
                    excluded += 1
                continue
            deltas.append((a - c) / c)
        else:
            deltas.append(a - c)
    n = len(deltas)
    if n == 0:
        return PairedDelta(0.0, 0.0, 0.0, 0, excluded, 1.0)
    arr = np.array(deltas)
    mean = float(arr.mean())
    if n > 1:
        se = float(arr.std(ddof=1)) / math.sqrt(n)
    else:
        se = 0.0
    if se > 0.0:
        z = mean / se
        p = _normal_p_two_sided(z)
    else:
        p = 1.0 if mean == 0.0 else 0.0
    return PairedDelta(mean, mean - Z_95 * se, mean + Z_95 * se, n, excluded, p)


@dataclass
class ArmReport:
    name: str
    mean_spatial_cost: float
    mean_error_rate: float
    autocorrect_good: int
    autocorrect_bad: int
    spatial_cost_delta: PairedDelta
    error_rate_delta: PairedDelta


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    arms: list[ArmReport]
    per_user: dict[str, list[SessionMetrics]]  # arm name -> metrics by user index

    def arm(self, name: str) -> ArmReport:
        for a in self.arms:
            if a.name == name:
                return a
        raise KeyError(name)

    def values(self, arm: str, metric: str) -> list[float]:
        return [getattr(m, metric) for m in self.per_user[arm]]

    def pairwise(self, base: str, other: str, metric: str, relative: bool = True) -> PairedDelta:
        """Paired delta of `other` vs `base` on any metric."""
        return paired_delta(self.values(base, metric), self.values(other, metric), relative)


def run_experiment(
    config: ExperimentConfig,
    layout: KeyboardLayout | None = None,
    lm: WordLM | None = None,
) -> ExperimentReport:
    """Run every arm over the identical seeded population."""
    config.validate()
    layout = layout or qwerty_layout()
    if lm is None:
        lm = default_lm(config.lexicon_top_n)
    weights = config.archetype_weights
    if weights is None:
        weights = [1.0] * len(config.archetypes)
    probs = np.array(weights, dtype=np.float64)
    probs /= probs.sum()

    children = np.random.SeedSequence(config.master_seed).spawn(config.users)
    per_user: dict[str, list[SessionMetrics]] = {a.name: [] for a in config.arms}
    for child in children:
        st = child.generate_state(4)
        pick_rng = np.random.default_rng(int(st[0]))
        arch = config.archetypes[int(pick_rng.choice(len(config.archetypes), p=probs))]
        user = gen_user(arch, int(st[1]), layout)
        prompts = sample_prompts(lm, config.prompts_per_user, np.random.default_rng(int(st[2])))
        session_seed = int(st[3])
        checksum = None
        for arm in config.arms:
            metrics = run_session(user, prompts, arm.engine, session_seed, layout, lm)
            if checksum is None:
                checksum = metrics.touch_checksum
            elif metrics.touch_checksum != checksum:
                raise ExperimentError(
                    f"pairing invariant violated: arm {arm.name!r} saw a different touch stream"
                )
            per_user[arm.name].append(metrics)

    control_cost = [m.avg_spatial_cost for m in per_user[config.control]]
    control_err = [m.top1_error_rate for m in per_user[config.control]]
    arms = []
    for arm in config.arms:
        rows = per_user[arm.name]
        arms.append(
            ArmReport(
                name=arm.name,
                mean_spatial_cost=float(np.mean([m.avg_spatial_cost for m in rows])),
                mean_error_rate=float(np.mean([m.top1_error_rate for m in rows])),
                autocorrect_good=sum(m.autocorrect_good for m in rows),
                autocorrect_bad=sum(m.autocorrect_bad for m in rows),
                spatial_cost_delta=paired_delta(
                    control_cost, [m.avg_spatial_cost for m in rows]
                ),
                error_rate_delta=paired_delta(
                    control_err, [m.top1_error_rate for m in rows], relative=False
                ),
            )
        )
    return ExperimentReport(config=config, arms=arms, per_user=per_user)


# ---------------------------------------------------------------------------
# Report rendering (deterministic byte-for-byte for a fixed config + seed).


def render_report_csv(report: ExperimentReport) -> str:
    lines = [
        "arm,metric,mean,delta_vs_control,ci_lo,ci_hi,p_value,pairs,excluded"
    ]
    for arm in report.arms:
        for metric, mean, delta in (
            ("avg_spatial_cost", arm.mean_spatial_cost, arm.spatial_cost_delta),
            ("top1_error_rate", arm.mean_error_rate, arm.error_rate_delta),
        ):
            lines.append(
                ",".join(
                    [
                        arm.name,
                        metric,
                        repr(mean),
                        repr(delta.mean),
                        repr(delta.ci_lo),
                        repr(delta.ci_hi),
                        repr(delta.p_value),
                        str(delta.n),
                        str(delta.excluded),
                    ]
                )
            )
    return "\n".join(lines) + "\n"


def render_per_user_csv(report: ExperimentReport) -> str:
    lines = ["arm,user,avg_spatial_cost,top1_error_rate,autocorrect_good,autocorrect_bad,touch_checksum"]
    for arm in report.config.arms:
        for i, m in enumerate(report.per_user[arm.name]):
            lines.append(
                ",".join(
                    [
                        arm.name,
                        str(i),
                        repr(m.avg_spatial_cost),
                        repr(m.top1_error_rate),
                        str(m.autocorrect_good),
                        str(m.autocorrect_bad),
                        m.touch_checksum,
                    ]
                )
            )
    return "\n".join(lines) + "\n"


def render_summary(report: ExperimentReport) -> str:
    cfg = report.config
    out = [
        f"experiment: {cfg.name}",
        f"users: {cfg.users}  prompts/user: {cfg.prompts_per_user}  master_seed: {cfg.master_seed}",
        f"control: {cfg.control}",
        "",
        f"{'arm':24s} {'cost':>10s} {'d_cost%':>9s} {'95% CI':>22s} {'err':>8s} {'d_err':>9s}",
    ]
    for arm in report.arms:
        d = arm.spatial_cost_delta
        e = arm.error_rate_delta
        ci = f"[{d.ci_lo:+.4f},{d.ci_hi:+.4f}]"
        out.append(
            f"{arm.name:24s} {arm.mean_spatial_cost:10.5f} {100 * d.mean:+8.3f}% {ci:>22s}"
            f" {arm.mean_error_rate:8.5f} {e.mean:+9.5f}"
        )
    out.append("")
    return "\n".join(out) + "\n"


def write_report(report: ExperimentReport, outdir: str | Path) -> list[Path]:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    files = []
    for name, text in (
        ("report.csv", render_report_csv(report)),
        ("per_user.csv", render_per_user_csv(report)),
        ("summary.txt", render_summary(report)),
        ("config.json", json.dumps(report.config.to_document(), indent=1) + "\n"),
    ):
        path = outdir / name
        path.write_text(text)
        files.append(path)
    return files


# ---------------------------------------------------------------------------
# Plot-data emission (CSV only; no plotting dependency).


def emit_scatter(
    trace: SessionTrace | None,
    model: PersonalizedModel | None,
    outdir: str | Path,
) -> list[Path]:
    """Write per-touch offsets, learned per-key offsets, and cluster boxes."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    files = []
    if trace is not None:
        lines = ["char,dx,dy"]
        for char, dx, dy in trace.rows:
            lines.append(f"{char},{repr(dx)},{repr(dy)}")
        path = outdir / "touch_offsets.csv"
        path.write_text("\n".join(lines) + "\n")
        files.append(path)
    if model is not None:
        lines = ["char,dx,dy,cluster"]
        for key in model.layout.keys:
            off = model.offset_for_char(key.char)
            cluster = model.key_cluster.get(key.char, -1)
            lines.append(f"{key.char},{repr(off.dx)},{repr(off.dy)},{cluster}")
        path = outdir / "key_offsets.csv"
        path.write_text("\n".join(lines) + "\n")
        files.append(path)

        lines = ["cluster,x0,y0,x1,y1,keys,offset_dx,offset_dy,n"]
        for i, leaf in enumerate(model.tree.leaves()):
            r = leaf.cluster.rect
            keys = "+".join(sorted(leaf.cluster.keys))
            lines.append(
                f"{i},{repr(r.x0)},{repr(r.y0)},{repr(r.x1)},{repr(r.y1)},"
                f"{keys},{repr(leaf.offset.dx)},{repr(leaf.offset.dy)},{repr(leaf.pooled.n)}"
            )
        path = outdir / "clusters.csv"
        path.write_text("\n".join(lines) + "\n")
        files.append(path)
    return files


# ---------------------------------------------------------------------------
# Study presets mirroring the live-study sequence.

OFFSET_HEAVY = Archetype(
    name="offset_heavy",
    shift_range=0.35,
    key_jitter=0.1,
    sigma_range=(0.18, 0.28),
)

DRIFTY = Archetype(
    name="drifty",
    shift_range=0.25,
    key_jitter=0.15,
    sigma_range=(0.2, 0.32),
)

# Sloppier touches make estimation variance (and therefore training-data
# quantity) matter more, which is what the data-size study measures.
NOISY_DRIFTER = Archetype(
    name="noisy_drifter",
    shift_range=0.25,
    key_jitter=0.12,
    sigma_range=(0.26, 0.36),
)

ARCHETYPES = {
    "default": Archetype(),
    "offset_heavy": OFFSET_HEAVY,
    "drifty": DRIFTY,
    "noisy_drifter": NOISY_DRIFTER,
}


def _arm(name: str, personalized: bool = True, **kwargs) -> ArmSpec:
    history = kwargs.pop("history", None) or HistoryConfig()
    clusters = kwargs.pop("clusters", None) or ClusterConfig()
    params = kwargs.pop("params", None) or SpatialParams()
    return ArmSpec(
        name,
        EngineConfig(
            history=history, clusters=clusters, params=params, personalized=personalized
        ),
    )


def study_data_size(users: int = 200, prompts: int = 400, seed: int = 11) -> ExperimentConfig:
    """History-size sweep: more training data should fit better."""
    arms = [_arm("history=250", history=HistoryConfig(250, 5, 0.0))]
    for n in (500, 800):
        arms.append(_arm(f"history={n}", history=HistoryConfig(n, 5, 0.0)))
    return ExperimentConfig(
        name="data_size",
        arms=arms,
        control="history=250",
        users=users,
        prompts_per_user=prompts,
        archetypes=[NOISY_DRIFTER],
        master_seed=seed,
    )


def study_decay(users: int = 120, prompts: int = 220, seed: int = 12) -> ExperimentConfig:
    """Arithmetic decay vs uniform weights at 500 touches in 5 buckets."""
    return ExperimentConfig(
        name="decay",
        arms=[
            _arm("control", personalized=False),
            _arm("500/U", history=HistoryConfig(500, 5, 0.0)),
            _arm("500/D", history=HistoryConfig(500, 5, 0.15)),
        ],
        control="control",
        users=users,
        prompts_per_user=prompts,
        archetypes=[DRIFTY],
        master_seed=seed,
    )


def study_buckets(users: int = 120, prompts: int = 260, seed: int = 13) -> ExperimentConfig:
    """800-touch history split into different bucket counts."""
    arms = [_arm("control", personalized=False)]
    for b in (2, 4, 8, 16):
        arms.append(_arm(f"buckets={b}", history=HistoryConfig(800, b, 0.0)))
    return ExperimentConfig(
        name="buckets",
        arms=arms,
        control="control",
        users=users,
        prompts_per_user=prompts,
        archetypes=[DRIFTY],
        master_seed=seed,
    )


def study_clusters(users: int = 120, prompts: int = 260, seed: int = 14) -> ExperimentConfig:
    """Cluster-count sweep: accuracy may move, user metrics should not."""
    arms = [_arm("control", personalized=False)]
    for k in range(4, 11):
        arms.append(_arm(f"clusters={k}", clusters=ClusterConfig(k)))
    return ExperimentConfig(
        name="clusters",
        arms=arms,
        control="control",
        users=users,
        prompts_per_user=prompts,
        archetypes=[DRIFTY],
        master_seed=seed,
    )


def study_sigma_grid(users: int = 80, prompts: int = 200, seed: int = 15) -> ExperimentConfig:
    """Isotropic-scale grid with personalization on, against the production
    baseline of sigma = 0.55 with no adaptation."""
    arms = [_arm("control", personalized=False)]
    for sigma in (0.40, 0.45, 0.50, 0.55, 0.60):
        arms.append(_arm(f"sigma={sigma:.2f}", params=SpatialParams(sigma0=sigma)))
    return ExperimentConfig(
        name="sigma_grid",
        arms=arms,
        control="control",
        users=users,
        prompts_per_user=prompts,
        archetypes=[OFFSET_HEAVY],
        master_seed=seed,
    )


def study_personalization(users: int = 120, prompts: int = 200, seed: int = 16) -> ExperimentConfig:
    """Best personalized sigma arm vs best non-personalized sigma arm."""
    arms = []
    for sigma in (0.45, 0.50, 0.55):
        arms.append(
            _arm(f"off/sigma={sigma:.2f}", personalized=False, params=SpatialParams(sigma0=sigma))
        )
        arms.append(_arm(f"on/sigma={sigma:.2f}", params=SpatialParams(sigma0=sigma)))
    return ExperimentConfig(
        name="personalization",
        arms=arms,
        control="off/sigma=0.55",
        users=users,
        prompts_per_user=prompts,
        archetypes=[OFFSET_HEAVY],
        master_seed=seed,
    )


def study_covariance(users: int = 80, prompts: int = 200, seed: int = 17) -> ExperimentConfig:
    """Personalized means with isotropic vs learned covariance."""
    return ExperimentConfig(
        name="covariance",
        arms=[
            _arm("isotropic"),
            _arm("covariance", params=SpatialParams(covariance_enabled=True)),
        ],
        control="isotropic",
        users=users,
        prompts_per_user=prompts,
        archetypes=[OFFSET_HEAVY],
        master_seed=seed,
    )


STUDIES = {
    "data-size": study_data_size,
    "decay": study_decay,
    "buckets": study_buckets,
    "clusters": study_clusters,
    "sigma": study_sigma_grid,
    "personalization": study_personalization,
    "covariance": study_covariance,
}
