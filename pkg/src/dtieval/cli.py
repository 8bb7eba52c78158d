"""Command-line front end: simulate, evaluate, compare, validate.

Exit codes: 0 success, 2 usage/config/input error, 1 internal error.
Diagnostics go to stderr; data goes to stdout or the requested files.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .errors import ConfigError, DtiEvalError
from .geo import enu_to_geodetic
from .ingest import write_trial
from .model import Track, TrackSample, TrajectorySample, TrialBundle
from .pipeline import evaluate_trial_dir
from .scoring import ScoringContext, WeightConfig, load_weights, rating_table, update_rating
from .simulator import (
    DtiModelConfig,
    ScenarioConfig,
    run_validation_suite,
    simulate_trial,
)


def _read_json(path) -> dict:
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"file not found: {p}")
    try:
        return json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{p}: invalid JSON: {exc}") from exc


def _bundle_to_geodetic(bundle: TrialBundle, origin) -> TrialBundle:
    def conv(pos):
        lat, lon, alt = enu_to_geodetic(pos, origin)
        return np.array([lat, lon, alt])

    truths = tuple(
        replace(
            g,
            samples=tuple(
                TrajectorySample(t=s.t, position=conv(s.position), velocity=s.velocity)
                for s in g.samples
            ),
        )
        for g in bundle.ground_truths
    )
    detections = tuple(replace(d, position=conv(d.position)) for d in bundle.detections)
    tracks = tuple(
        Track(
            tr.track_id,
            tuple(
                TrackSample(
                    t=s.t,
                    position=conv(s.position),
                    velocity=s.velocity,
                    ident=s.ident,
                    confidence=s.confidence,
                )
                for s in tr.samples
            ),
        )
        for tr in bundle.tracks
    )
    return replace(bundle, ground_truths=truths, detections=detections, tracks=tracks)


def cmd_simulate(args) -> int:
    scenario = ScenarioConfig.from_dict(_read_json(args.scenario))
    model = DtiModelConfig.from_dict(_read_json(args.model))
    bundle, config, _aoi, _window = simulate_trial(scenario, model, seed=args.seed)
    geodetic = _bundle_to_geodetic(bundle, scenario.origin_geodetic)
    write_trial(args.out, geodetic, config)
    print(f"wrote trial to {args.out}", file=sys.stderr)
    return 0


def cmd_evaluate(args) -> int:
    context = ScoringContext.from_file(args.context) if args.context else None
    weights = load_weights(args.weights) if args.weights else None
    report = evaluate_trial_dir(
        args.trial_dir,
        context=context,
        weights=weights,
        normalize=not args.no_normalize,
    )
    text = json.dumps(report, sort_keys=True, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_compare(args) -> int:
    store = Path(args.ratings)
    for path in args.reports:
        report = _read_json(path)
        if "scores" not in report or "trial" not in report:
            raise ConfigError(f"{path}: not a normalized evaluation report")
        scores = report["scores"]
        from .scoring import ScoreTree

        tree = ScoreTree(
            metric_scores=scores["metric_scores"],
            component_scores=scores["component_scores"],
            system_score=scores["system_score"],
            missing=scores.get("missing", {}),
        )
        update_rating(
            store,
            dti_id=report["trial"]["dti_id"],
            tree=tree,
            trial_id=report["trial"].get("trial_id", ""),
        )
    rows = rating_table(store)
    table = [
        {
            "rank": i + 1,
            "dti_id": r.dti_id,
            "trials": r.trials,
            "mean_system_score": r.mean_system_score,
            "mean_component_scores": r.mean_component_scores,
        }
        for i, r in enumerate(rows)
    ]
    text = json.dumps(table, sort_keys=True, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_validate(args) -> int:
    suite = _read_json(args.suite)
    scenarios = [
        (s.get("name", f"scenario_{i}"), ScenarioConfig.from_dict(s))
        for i, s in enumerate(suite.get("scenarios", []))
    ]
    models = [
        (m.get("name", m.get("strategy", f"model_{i}")), DtiModelConfig.from_dict(m))
        for i, m in enumerate(suite.get("models", []))
    ]
    iterations = args.iterations or int(suite.get("iterations", 1))
    report = run_validation_suite(
        scenarios, models, iterations, base_seed=int(suite.get("seed", 0))
    )
    text = json.dumps(report, sort_keys=True, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dtieval",
        description="Counter-UAS DTI evaluation engine and scenario simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a simulated trial directory")
    p.add_argument("--scenario", required=True, help="scenario.json")
    p.add_argument("--model", required=True, help="dti_model.json")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True, help="output trial directory")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("evaluate", help="score a trial directory")
    p.add_argument("trial_dir")
    p.add_argument("--context", help="scoring_context.json")
    p.add_argument("--weights", help="weights.json")
    p.add_argument("--out", help="report.json output path (default stdout)")
    p.add_argument(
        "--no-normalize",
        action="store_true",
        help="emit raw metrics only, without scores",
    )
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("compare", help="update the rating store and print the table")
    p.add_argument("reports", nargs="+", help="report.json files")
    p.add_argument("--ratings", default="ratings.jsonl")
    p.add_argument("--out", help="table output path (default stdout)")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("validate", help="run a simulation validation suite")
    p.add_argument("suite", help="suite.json")
    p.add_argument("--iterations", type=int, default=None)
    p.add_argument("--out", help="validation report path (default stdout)")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DtiEvalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover - internal failures
        print(f"internal error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
