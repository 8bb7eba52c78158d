#!/usr/bin/env python3
"""Run the three bundled DTI strategy presets through the simulation
validation suite and print the per-cell summary.

Usage: python scripts/run_validation_demo.py [--iterations N] [--seed S]
"""
import argparse
import json

from dtieval.simulator import (
    ClutterConfig,
    DroneConfig,
    DtiModelConfig,
    ScenarioConfig,
    STRATEGY_PRESETS,
    run_validation_suite,
)


def build_scenarios():
    crossing = ScenarioConfig(
        category="sensitive_site",
        duration_s=120.0,
        drones=(
            DroneConfig(
                id="intruder",
                waypoints=((1900.0, 0.0, 60.0), (150.0, 0.0, 60.0)),
                speed_mps=20.0,
            ),
        ),
    )
    cluttered = ScenarioConfig(
        category="public_event",
        duration_s=120.0,
        drones=(
            DroneConfig(
                id="intruder",
                waypoints=((0.0, 1800.0, 40.0), (0.0, 200.0, 40.0)),
                speed_mps=15.0,
            ),
        ),
        clutter=ClutterConfig(bird_count=4, spurious_detection_rate_hz=1.0),
    )
    return [("crossing", crossing), ("cluttered", cluttered)]


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--iterations", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", help="write the full JSON report here")
    args = parser.parse_args()

    models = [(name, STRATEGY_PRESETS[name]) for name in ("A", "B", "C")]
    report = run_validation_suite(
        build_scenarios(), models, args.iterations, base_seed=args.seed
    )

    print(f"{'scenario':<12} {'model':<6} {'system':>7}  "
          f"{'complete':>8} {'continuity':>10} {'loc2d':>7} {'f1':>6}")
    for cell in report["cells"]:
        raw = cell["mean_raw_metrics"]

        def fmt(key):
            v = raw.get(key)
            return f"{v:.3f}" if v is not None else "-"

        score = cell["mean_system_score"]
        print(
            f"{cell['scenario']:<12} {cell['model']:<6} "
            f"{score:>7.4f}  {fmt('track_completeness'):>8} "
            f"{fmt('track_continuity'):>10} {fmt('location_accuracy_2d'):>7} "
            f"{fmt('f1'):>6}"
        )
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(report, fh, indent=2, sort_keys=True)
        print(f"\nfull report written to {args.out}")


if __name__ == "__main__":
    main()
