#!/usr/bin/env python3
"""Simulate the same scenario for each strategy preset, score every
trial, feed the rating store and print the resulting ranking.

Usage: python scripts/head_to_head.py [--trials N] [--workdir DIR]
"""
import argparse
import tempfile
from pathlib import Path

from dtieval.scoring import ScoreTree, rating_table, update_rating
from dtieval.simulator import (
    ClutterConfig,
    DroneConfig,
    ScenarioConfig,
    STRATEGY_PRESETS,
    evaluate_simulated,
)

SCENARIO = ScenarioConfig(
    category="border",
    duration_s=90.0,
    drones=(
        DroneConfig(
            id="intruder",
            waypoints=((1800.0, 600.0, 80.0), (200.0, -400.0, 40.0)),
            speed_mps=25.0,
        ),
    ),
    clutter=ClutterConfig(bird_count=2, spurious_detection_rate_hz=0.5),
)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--trials", type=int, default=10)
    parser.add_argument("--workdir", help="where to keep ratings.jsonl")
    args = parser.parse_args()

    workdir = Path(args.workdir) if args.workdir else Path(tempfile.mkdtemp())
    workdir.mkdir(parents=True, exist_ok=True)
    store = workdir / "ratings.jsonl"

    for name, model in STRATEGY_PRESETS.items():
        for seed in range(args.trials):
            report = evaluate_simulated(SCENARIO, model, seed=seed)
            scores = report["scores"]
            tree = ScoreTree(
                metric_scores=scores["metric_scores"],
                component_scores=scores["component_scores"],
                system_score=scores["system_score"],
                missing=scores["missing"],
            )
            update_rating(store, dti_id=f"strategy_{name}", tree=tree,
                          trial_id=report["trial"]["trial_id"])

    print(f"rating store: {store}\n")
    print(f"{'rank':<5} {'dti':<12} {'trials':>6} {'system':>8}  components")
    for rank, row in enumerate(rating_table(store), 1):
        comps = ", ".join(
            f"{c}={v:.3f}" for c, v in sorted(row.mean_component_scores.items())
        )
        print(f"{rank:<5} {row.dti_id:<12} {row.trials:>6} "
              f"{row.mean_system_score:>8.4f}  {comps}")


if __name__ == "__main__":
    main()
