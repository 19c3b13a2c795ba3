"""Command-line entry points: simulate, experiment, sweep, plotdata, demo-serve."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import harness
from .decoder import EngineConfig
from .harness import (
    ARCHETYPES,
    STUDIES,
    ExperimentConfig,
    emit_scatter,
    run_experiment,
    write_report,
)
from .langmodel import default_lm
from .layout import qwerty_layout
from .simulator import SessionTrace, gen_user, run_session, sample_prompts


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=None, help="master seed override")
    p.add_argument("--out", type=Path, default=Path("out"), help="output directory")


def cmd_simulate(args: argparse.Namespace) -> int:
    layout = qwerty_layout()
    lm = default_lm(args.lexicon_top_n)
    arch = ARCHETYPES[args.archetype]
    seed = args.seed if args.seed is not None else 0
    rows = ["user,words,avg_spatial_cost,top1_error_rate,autocorrect_good,autocorrect_bad"]
    for u in range(args.users):
        user = gen_user(arch, seed + u, layout)
        prompts = sample_prompts(lm, args.words, np.random.default_rng(seed + 10_000 + u))
        metrics = run_session(user, prompts, EngineConfig(), seed + 20_000 + u, layout, lm)
        rows.append(
            f"{u},{metrics.words},{repr(metrics.avg_spatial_cost)},"
            f"{repr(metrics.top1_error_rate)},{metrics.autocorrect_good},{metrics.autocorrect_bad}"
        )
    text = "\n".join(rows) + "\n"
    args.out.mkdir(parents=True, exist_ok=True)
    (args.out / "sessions.csv").write_text(text)
    print(text, end="")
    return 0


def cmd_experiment(args: argparse.Namespace) -> int:
    config = ExperimentConfig.from_document(json.loads(args.config.read_text()))
    if args.seed is not None:
        config.master_seed = args.seed
    report = run_experiment(config)
    write_report(report, args.out)
    print(harness.render_summary(report), end="")
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    builder = STUDIES[args.study]
    kwargs = {}
    if args.users is not None:
        kwargs["users"] = args.users
    if args.words is not None:
        kwargs["prompts"] = args.words
    if args.seed is not None:
        kwargs["seed"] = args.seed
    config = builder(**kwargs)
    report = run_experiment(config)
    write_report(report, args.out / config.name)
    print(harness.render_summary(report), end="")
    return 0


def cmd_plotdata(args: argparse.Namespace) -> int:
    layout = qwerty_layout()
    lm = default_lm(args.lexicon_top_n)
    arch = ARCHETYPES[args.archetype]
    seed = args.seed if args.seed is not None else 0
    user = gen_user(arch, seed, layout)
    prompts = sample_prompts(lm, args.words, np.random.default_rng(seed + 1))
    trace = SessionTrace()
    run_session(user, prompts, EngineConfig(), seed + 2, layout, lm, trace=trace)
    files = emit_scatter(trace, trace.final_model, args.out)
    for f in files:
        print(f)
    return 0


def cmd_demo_serve(args: argparse.Namespace) -> int:
    from .service import serve

    static = args.static
    if static is None:
        candidate = Path("frontend")
        if (candidate / "index.html").exists():
            static = str(candidate)
    return serve(
        host=args.host,
        port=args.port,
        lexicon_top_n=args.lexicon_top_n,
        static_dir=static,
    ) or 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="taptype", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run seeded synthetic typing sessions")
    _add_common(p)
    p.add_argument("--users", type=int, default=3)
    p.add_argument("--words", type=int, default=100)
    p.add_argument("--archetype", choices=sorted(ARCHETYPES), default="default")
    p.add_argument("--lexicon-top-n", type=int, default=2000)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("experiment", help="run a paired experiment from a config file")
    _add_common(p)
    p.add_argument("--config", type=Path, required=True)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("sweep", help="run a preset study")
    _add_common(p)
    p.add_argument("--study", choices=sorted(STUDIES), required=True)
    p.add_argument("--users", type=int, default=None)
    p.add_argument("--words", type=int, default=None)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("plotdata", help="emit scatter/offset/cluster CSVs for plotting")
    _add_common(p)
    p.add_argument("--words", type=int, default=200)
    p.add_argument("--archetype", choices=sorted(ARCHETYPES), default="default")
    p.add_argument("--lexicon-top-n", type=int, default=2000)
    p.set_defaults(func=cmd_plotdata)

    p = sub.add_parser("demo-serve", help="serve the demo keyboard backend")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8732)
    p.add_argument("--lexicon-top-n", type=int, default=None)
    p.add_argument("--static", default=None, help="frontend directory to serve (auto-detects ./frontend)")
    p.set_defaults(func=cmd_demo_serve)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
