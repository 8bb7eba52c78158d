"""Top-level acceptance suite.

Each test prints a single PASS line with the checked bound when it
succeeds; pytest reports the same test as the failure line otherwise.
"""
import filecmp
import json
import math

import numpy as np
import pytest

import naive
import oracles
import trialgen
from dtieval.association import (
    TrackPairAssociation,
    associate_detections,
    associate_tracks,
)
from dtieval.cli import main
from dtieval.detection_metrics import compute_detection_metrics
from dtieval.identification_metrics import compute_identification_metrics
from dtieval.intervals import Interval, IntervalSet
from dtieval.model import SensorPose
from dtieval.pipeline import collect_raw_metrics
from dtieval.scoring import (
    COMPONENTS,
    DEFAULT_CONTEXTS,
    WeightConfig,
    aggregate,
    component_of,
)
from dtieval.simulator import (
    ClassifierConfig,
    ClutterConfig,
    DroneConfig,
    DtiModelConfig,
    FovConfig,
    ScenarioConfig,
    evaluate_simulated,
)
from dtieval.tracking_metrics import (
    compute_tracking_metrics,
    minimal_association_subset,
    track_continuity,
)


def ok(msg):
    print(f"PASS {msg}")


def test_criterion_1_handover_example():
    """Six tracks, two nested inside the first, union exactly one hour:
    the minimal subset has 4 tracks and the continuity rate is 3.0."""
    pairs = {
        "t_0": TrackPairAssociation("g", "t_0", IntervalSet.from_pairs([(0, 1200)]), []),
        "t_1": TrackPairAssociation("g", "t_1", IntervalSet.from_pairs([(100, 300)]), []),
        "t_2": TrackPairAssociation("g", "t_2", IntervalSet.from_pairs([(500, 700)]), []),
        "t_3": TrackPairAssociation("g", "t_3", IntervalSet.from_pairs([(1200, 2100)]), []),
        "t_4": TrackPairAssociation("g", "t_4", IntervalSet.from_pairs([(2100, 3000)]), []),
        "t_5": TrackPairAssociation("g", "t_5", IntervalSet.from_pairs([(3000, 3600)]), []),
    }
    rate, subset, exact = track_continuity(pairs)
    assert exact
    assert set(subset) == {"t_0", "t_3", "t_4", "t_5"}
    assert len(subset) == 4
    assert rate == 3.0
    ok("criterion 1: nested-track handover example gives |subset|=4, rate=3.0 exactly")


def test_criterion_2_interval_oracle_equivalence():
    """1000 randomized interval-set cases against the 1 ms raster oracle."""
    rng = np.random.default_rng(101)

    def random_pairs():
        n = int(rng.integers(0, 9))
        out = []
        for _ in range(n):
            a = int(rng.integers(0, 30000))
            b = int(rng.integers(a + 1, 30001))
            out.append((a / 1000, b / 1000))
        return out

    for _ in range(1000):
        pa, pb = random_pairs(), random_pairs()
        a, b = IntervalSet.from_pairs(pa), IntervalSet.from_pairs(pb)
        lo, hi = oracles.grid_bounds(pa, pb, [(0, 0.001)])
        ra, rb = oracles.raster(pa, lo, hi), oracles.raster(pb, lo, hi)
        assert abs(a.duration - oracles.grid_duration(ra)) <= 1e-3
        assert abs(a.union(b).duration - oracles.grid_duration(ra | rb)) <= 1e-3
        assert abs(a.intersect(b).duration - oracles.grid_duration(ra & rb)) <= 1e-3
        assert abs(a.subtract(b).duration - oracles.grid_duration(ra & ~rb)) <= 1e-3
    ok("criterion 2: 1000 interval cases within 1 ms of the raster oracle")


def test_criterion_3_metric_oracle_equivalence():
    """Every raw metric matches the naive grid/loop reference on 100
    randomized small trials (<= 3 truths, <= 6 tracks)."""
    rng = np.random.default_rng(202)
    sensor = SensorPose(np.array([0.0, -500.0, 0.0]))
    window = Interval(0.0, 70.0)
    checked = {k: 0 for k in (
        "location_accuracy_2d", "location_accuracy_3d", "range_ratio_near",
        "range_ratio_far", "detection_precision", "detection_immediateness",
        "track_completeness", "track_continuity", "track_ambiguity",
        "track_spuriousness", "track_positional_accuracy",
        "track_velocity_accuracy", "longest_track_segment",
        "tracking_immediateness", "f1", "identification_precision",
        "pod", "mar", "far",
    )}
    for trial in range(100):
        truths, detections, tracks = trialgen.make_random_trial(rng)
        min_seg = float(rng.choice([0.0, 0.5, 1.0]))

        det_assoc = associate_detections(truths, detections, 50.0)
        trk_assoc = associate_tracks(truths, tracks, 50.0, min_seg)
        det_rep = compute_detection_metrics(truths, det_assoc, sensor)
        trk_rep = compute_tracking_metrics(truths, tracks, trk_assoc, window)
        id_rep = compute_identification_metrics(truths, tracks, trk_assoc)
        got = collect_raw_metrics(det_rep, trk_rep, id_rep)

        expect = naive.evaluate_naive(
            truths, detections, tracks, sensor.position, (0.0, 70.0),
            gate_m=50.0, min_segment_s=min_seg,
        )
        for name in checked:
            g, e = got[name], expect[name]
            assert (g is None) == (e is None), f"trial {trial}, {name}: {g} vs {e}"
            if g is None:
                continue
            if name in ("detection_immediateness", "tracking_immediateness"):
                assert abs(g - e) <= 1e-3, f"trial {trial}, {name}"
            elif e == 0:
                assert abs(g) <= 1e-9, f"trial {trial}, {name}"
            else:
                assert abs(g - e) / abs(e) <= 1e-9, f"trial {trial}, {name}: {g} vs {e}"
            checked[name] += 1
        tp, fp, fn, tn = expect["confusion"]
        cd = id_rep.confusion
        assert abs(cd.tp_s - tp) <= 1e-3
        assert abs(cd.fp_s - fp) <= 1e-3
        assert abs(cd.fn_s - fn) <= 1e-3
        if tn is not None:
            assert cd.tn_s is not None and abs(cd.tn_s - tn) <= 1e-3
    # every metric must actually have been exercised
    assert all(n > 0 for n in checked.values()), checked
    ok("criterion 3: 19 raw metrics match the naive reference on 100 random trials (rel 1e-9)")


def test_criterion_4_minimal_subset_optimality():
    """Greedy cover cardinality equals exhaustive search on 200 random
    single-interval instances with up to 10 tracks."""
    rng = np.random.default_rng(303)
    for _ in range(200):
        n = int(rng.integers(1, 11))
        sets = {}
        for k in range(n):
            a = int(rng.integers(0, 100))
            b = int(rng.integers(a + 1, 120))
            sets[f"t{k:02d}"] = IntervalSet.from_pairs([(float(a), float(b))])
        ids, exact = minimal_association_subset(sets)
        assert exact
        expect = oracles.min_cover_cardinality(
            {tid: s.to_pairs() for tid, s in sets.items()},
            lo_ms=0, hi_ms=120_000,
        )
        assert len(ids) == expect
        # the returned subset must itself be a cover
        union = IntervalSet.empty()
        for tid in ids:
            union = union.union(sets[tid])
        target = IntervalSet.empty()
        for s in sets.values():
            target = target.union(s)
        assert target.subtract(union).duration <= 1e-9
    ok("criterion 4: greedy cover optimal on 200/200 random instances (n <= 10)")


def noiseless_setup():
    scenario = ScenarioConfig(
        duration_s=60.0,
        drones=(
            DroneConfig(
                id="drone_0",
                waypoints=((2000.0, 0.0, 50.0), (140.0, 0.0, 50.0)),
                speed_mps=30.0,
            ),
        ),
    )
    model = DtiModelConfig(
        fov=FovConfig(max_range_m=3000.0),
        p_detect=1.0,
        pos_noise_sigma_m=0.0,
        track_drop_prob=0.0,
        classifier=ClassifierConfig(type="perfect"),
    )
    return scenario, model


def test_criterion_5_noiseless_closure():
    """A perfect simulated system scores perfectly."""
    scenario, model = noiseless_setup()
    report = evaluate_simulated(scenario, model, seed=0)
    raw = report["metrics"]["raw"]
    assert raw["track_completeness"] == 1.0
    assert raw["track_continuity"] == 0.0
    assert raw["track_positional_accuracy"] < 1e-6
    assert raw["f1"] == 1.0
    assert raw["detection_precision"] == 1.0
    assert abs(report["scores"]["system_score"] - 1.0) <= 1e-9
    ok("criterion 5: noiseless simulation closes the loop at system score 1.0 +/- 1e-9")


def _mean_raw(scenario, model, metric, seeds):
    vals = []
    for seed in seeds:
        raw = evaluate_simulated(scenario, model, seed=seed)["metrics"]["raw"]
        if raw[metric] is not None:
            vals.append(raw[metric])
    assert vals, f"{metric} undefined on all seeds"
    return sum(vals) / len(vals)


def test_criterion_6_validation_orderings():
    """Known model degradations must move the right metric the right
    way, averaged over 20 seeds per cell."""
    seeds = range(20)
    scenario, _ = noiseless_setup()
    base = dict(p_detect=0.9, pos_noise_sigma_m=2.0)

    long_range = DtiModelConfig(fov=FovConfig(max_range_m=2000.0), **base)
    short_range = DtiModelConfig(fov=FovConfig(max_range_m=500.0), **base)
    far_long = _mean_raw(scenario, long_range, "range_ratio_far", seeds)
    far_short = _mean_raw(scenario, short_range, "range_ratio_far", seeds)
    assert far_long > far_short

    fov = FovConfig(max_range_m=3000.0)
    precise = DtiModelConfig(fov=fov, p_detect=0.9, pos_noise_sigma_m=1.0)
    sloppy = DtiModelConfig(fov=fov, p_detect=0.9, pos_noise_sigma_m=10.0)
    acc_precise = _mean_raw(scenario, precise, "location_accuracy_2d", seeds)
    acc_sloppy = _mean_raw(scenario, sloppy, "location_accuracy_2d", seeds)
    assert acc_precise < acc_sloppy

    steady = DtiModelConfig(fov=fov, p_detect=0.95, track_drop_prob=0.0)
    droppy = DtiModelConfig(fov=fov, p_detect=0.95, track_drop_prob=0.2)
    cont_steady = _mean_raw(scenario, steady, "track_continuity", seeds)
    cont_droppy = _mean_raw(scenario, droppy, "track_continuity", seeds)
    assert cont_steady < cont_droppy

    # the drone leaves the area at t=40 while birds stay all 60 s, so
    # mislabeled clutter time is not masked by concurrent drone coverage
    cluttered = ScenarioConfig(
        duration_s=scenario.duration_s,
        drones=(
            DroneConfig(
                id="drone_0",
                waypoints=((0.0, 0.0, 50.0), (3000.0, 0.0, 50.0)),
                speed_mps=50.0,
            ),
        ),
        clutter=ClutterConfig(bird_count=3, spurious_detection_rate_hz=0.5),
    )
    cfov = FovConfig(max_range_m=2000.0)
    perfect = DtiModelConfig(fov=cfov, classifier=ClassifierConfig(type="perfect"))
    eager = DtiModelConfig(fov=cfov, classifier=ClassifierConfig(type="always_positive"))
    f1_perfect = _mean_raw(cluttered, perfect, "f1", seeds)
    f1_eager = _mean_raw(cluttered, eager, "f1", seeds)
    assert f1_perfect > f1_eager
    ok(
        "criterion 6: all four 20-seed orderings strict "
        f"(range_ratio_far {far_long:.3f}>{far_short:.3f}, "
        f"loc_acc {acc_precise:.2f}<{acc_sloppy:.2f}, "
        f"continuity {cont_steady:.2f}<{cont_droppy:.2f}, "
        f"f1 {f1_perfect:.3f}>{f1_eager:.3f})"
    )


def test_criterion_7_identity_relations():
    """PoD + MAR = 1 and F1 = harmonic mean(precision, recall) on a
    spread of confusion fixtures."""
    from dtieval.identification_metrics import (
        ConfusionDurations, f1, mar, precision_id, recall_pod,
    )

    rng = np.random.default_rng(707)
    fixtures = [
        (10.0, 0.0, 0.0, 0.0),
        (6.0, 2.0, 4.0, 8.0),
        (0.0, 3.0, 5.0, 1.0),
        (1e-9, 1e9, 1e9, 0.0),
    ] + [tuple(rng.uniform(0, 1e4, size=4)) for _ in range(100)]
    for tp, fp, fn, tn in fixtures:
        cd = ConfusionDurations(tp, fp, fn, tn, "uav")
        pod, m = recall_pod(cd), mar(cd)
        if pod is not None and m is not None:
            assert abs(pod + m - 1.0) <= 1e-12
        p, r, f = precision_id(cd), recall_pod(cd), f1(cd)
        if None not in (p, r, f) and p + r > 0:
            assert abs(f - 2 * p * r / (p + r)) <= 1e-12
    ok("criterion 7: PoD+MAR=1 and F1=H(precision, recall) within 1e-12 on all fixtures")


def test_criterion_8_aggregation_invariance():
    """Weight scaling at any single level never changes scores by more
    than 1e-12, and raising a metric score never lowers an aggregate."""
    rng = np.random.default_rng(808)
    names = list(DEFAULT_CONTEXTS)
    for _ in range(500):
        picked = [n for n in names if rng.random() < 0.7] or [names[0]]
        scores = {n: float(rng.uniform(0, 1)) for n in picked}
        metric_w = {c: {} for c in COMPONENTS}
        for n in names:
            metric_w[component_of(n)][n] = float(rng.uniform(0.1, 5.0))
        comp_w = {c: float(rng.uniform(0.1, 5.0)) for c in COMPONENTS}
        weights = WeightConfig(metric_w, comp_w)
        base = aggregate(scores, weights)

        # scale one level by 7
        level = rng.integers(0, len(COMPONENTS) + 1)
        if level == len(COMPONENTS):
            scaled = WeightConfig(metric_w, {c: 7.0 * w for c, w in comp_w.items()})
        else:
            comp = COMPONENTS[level]
            mw = {c: dict(metric_w[c]) for c in COMPONENTS}
            mw[comp] = {n: 7.0 * w for n, w in mw[comp].items()}
            scaled = WeightConfig(mw, comp_w)
        other = aggregate(scores, scaled)
        for c, s in base.component_scores.items():
            assert abs(other.component_scores[c] - s) <= 1e-12
        assert abs(other.system_score - base.system_score) <= 1e-12

        # monotonicity under a single raised metric score
        bump = picked[int(rng.integers(0, len(picked)))]
        raised = dict(scores)
        raised[bump] = min(1.0, raised[bump] + float(rng.uniform(0, 1)))
        higher = aggregate(raised, weights)
        for c, s in base.component_scores.items():
            assert higher.component_scores[c] >= s - 1e-12
        assert higher.system_score >= base.system_score - 1e-12
    ok("criterion 8: weight-scale invariance and monotonicity hold on 500 random trees")


def test_criterion_9_simulation_determinism(tmp_path):
    """Identical seeds produce byte-identical trial files."""
    scenario = {
        "category": "public_event",
        "duration_s": 45.0,
        "drones": [
            {
                "id": "drone_0",
                "waypoints": [[1500.0, 200.0, 60.0], [100.0, -300.0, 40.0]],
                "speed_mps": 25.0,
            }
        ],
        "clutter": {"bird_count": 2, "spurious_detection_rate_hz": 1.0},
    }
    model = {"strategy": "B"}
    scen_path = tmp_path / "scenario.json"
    scen_path.write_text(json.dumps(scenario))
    model_path = tmp_path / "model.json"
    model_path.write_text(json.dumps(model))

    outs = []
    for name in ("run1", "run2"):
        out = tmp_path / name
        rc = main([
            "simulate", "--scenario", str(scen_path), "--model", str(model_path),
            "--seed", "1234", "--out", str(out),
        ])
        assert rc == 0
        outs.append(out)
    files = ["ground_truth.jsonl", "detections.jsonl", "tracks.jsonl", "trial.json"]
    match, mismatch, errors = filecmp.cmpfiles(outs[0], outs[1], files, shallow=False)
    assert mismatch == [] and errors == []
    assert sorted(match) == sorted(files)
    ok("criterion 9: two seeded simulation runs are byte-identical across all four files")
