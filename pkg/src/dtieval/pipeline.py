"""End-to-end trial evaluation: load -> geo -> associate -> metrics ->
normalize -> aggregate -> report."""
from __future__ import annotations

from dataclasses import replace
from typing import Optional

import numpy as np

from . import __version__
from .association import (
    DEFAULT_GATE_M,
    DEFAULT_MIN_SEGMENT_S,
    associate_detections,
    associate_tracks,
)
from .detection_metrics import DetectionMetricsReport, compute_detection_metrics
from .geo import AreaOfInterest, clip_to_window_and_aoi, geodetic_to_enu
from .identification_metrics import (
    DEFAULT_POSITIVE_LABEL,
    IdentificationMetricsReport,
    compute_identification_metrics,
)
from .ingest import TrialConfig, load_trial
from .intervals import Interval
from .model import (
    Detection,
    GroundTruthTrajectory,
    SensorPose,
    Track,
    TrackSample,
    TrajectorySample,
    TrialBundle,
)
from .scoring import ScoreTree, ScoringContext, WeightConfig, aggregate, normalize_all
from .tracking_metrics import TrackingMetricsReport, compute_tracking_metrics

SCHEMA_VERSION = 1


def aoi_from_config(aoi_cfg: dict, origin: tuple[float, float, float]) -> AreaOfInterest:
    """Build an AreaOfInterest from the trial.json AoI block (geodetic)."""
    common = dict(
        alt_min_m=float(aoi_cfg["alt_min_m"]),
        alt_max_m=float(aoi_cfg["alt_max_m"]),
        ignore_altitude=bool(aoi_cfg.get("aoi_ignore_altitude", False)),
    )
    if aoi_cfg["shape"] == "circle":
        c = aoi_cfg["center"]
        center = geodetic_to_enu(c["lat"], c["lon"], origin[2], origin)
        return AreaOfInterest(
            shape="circle", center_en=center[:2], radius_m=float(aoi_cfg["radius_m"]), **common
        )
    verts = np.array(
        [
            geodetic_to_enu(v["lat"], v["lon"], origin[2], origin)[:2]
            for v in aoi_cfg["vertices"]
        ]
    )
    return AreaOfInterest(shape="polygon", vertices_en=verts, **common)


def bundle_to_enu(bundle: TrialBundle, origin: tuple[float, float, float]) -> TrialBundle:
    """Convert a raw-geodetic bundle to ENU around the sensor origin."""

    def conv(pos):
        return geodetic_to_enu(float(pos[0]), float(pos[1]), float(pos[2]), origin)

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
    detections = tuple(
        replace(d, position=conv(d.position)) for d in bundle.detections
    )
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
    return replace(
        bundle,
        ground_truths=truths,
        detections=detections,
        tracks=tracks,
        sensor=SensorPose(np.zeros(3)),
    )


def _collapse(values: list[Optional[float]]) -> Optional[float]:
    """Mean over truths where the per-truth metric is defined."""
    present = [v for v in values if v is not None]
    if not present:
        return None
    return sum(present) / len(present)


def collect_raw_metrics(
    det: DetectionMetricsReport,
    trk: TrackingMetricsReport,
    ident: IdentificationMetricsReport,
) -> dict[str, Optional[float]]:
    d = det.per_truth
    t = trk.per_truth
    return {
        "location_accuracy_2d": _collapse([x.location_accuracy_2d for x in d]),
        "location_accuracy_3d": _collapse([x.location_accuracy_3d for x in d]),
        "range_ratio_near": _collapse([x.range_ratio_near for x in d]),
        "range_ratio_far": _collapse([x.range_ratio_far for x in d]),
        "detection_precision": det.detection_precision,
        "detection_immediateness": _collapse([x.detection_immediateness for x in d]),
        "track_completeness": _collapse([x.track_completeness for x in t]),
        "track_continuity": _collapse([x.track_continuity for x in t]),
        "track_ambiguity": _collapse([x.track_ambiguity for x in t]),
        "track_spuriousness": trk.track_spuriousness,
        "track_positional_accuracy": _collapse([x.track_positional_accuracy for x in t]),
        "track_velocity_accuracy": _collapse([x.track_velocity_accuracy for x in t]),
        "longest_track_segment": _collapse(
            [x.longest_track_segment for x in t] if t else [None]
        ),
        "tracking_immediateness": _collapse([x.tracking_immediateness for x in t]),
        "f1": ident.f1,
        "identification_precision": ident.identification_precision,
        "pod": ident.pod,
        "mar": ident.mar,
        "far": ident.far,
    }


def evaluate_bundle(
    bundle: TrialBundle,
    window: Interval,
    aoi: AreaOfInterest,
    gate_m: float = DEFAULT_GATE_M,
    min_segment_s: float = DEFAULT_MIN_SEGMENT_S,
    positive_label: str = DEFAULT_POSITIVE_LABEL,
    context: Optional[ScoringContext] = None,
    weights: Optional[WeightConfig] = None,
    normalize: bool = True,
) -> dict:
    """Evaluate an ENU bundle and return the report dict."""
    clip = clip_to_window_and_aoi(bundle, window, aoi)
    b = clip.bundle
    truths = list(b.ground_truths)
    det_assoc = associate_detections(truths, list(b.detections), gate_m)
    trk_assoc = associate_tracks(truths, list(b.tracks), gate_m, min_segment_s)

    det_report = compute_detection_metrics(truths, det_assoc, b.sensor)
    trk_report = compute_tracking_metrics(truths, list(b.tracks), trk_assoc, window)
    id_report = compute_identification_metrics(
        truths, list(b.tracks), trk_assoc, positive_label
    )

    raw = collect_raw_metrics(det_report, trk_report, id_report)
    report = {
        "schema_version": SCHEMA_VERSION,
        "tool_version": __version__,
        "trial": {"trial_id": b.trial_id, "dti_id": b.dti_id},
        "metrics": {
            "raw": raw,
            "per_truth": {
                "detection": [vars_clean(x) for x in det_report.per_truth],
                "tracking": [vars_clean(x) for x in trk_report.per_truth],
            },
            "confusion_durations": {
                "tp_s": id_report.confusion.tp_s,
                "fp_s": id_report.confusion.fp_s,
                "fn_s": id_report.confusion.fn_s,
                "tn_s": id_report.confusion.tn_s,
                "positive_label": id_report.confusion.positive_label,
            },
        },
        "diagnostics": {
            "dropped_truths": list(clip.dropped_truths),
            "identification_unavailable": list(id_report.unavailable),
        },
        "config": {
            "gate_m": gate_m,
            "min_segment_s": min_segment_s,
            "positive_label": positive_label,
            "window": [window.start, window.end],
            "normalized": normalize,
        },
    }
    if normalize:
        context = context or ScoringContext.default()
        weights = weights or WeightConfig.default()
        scores, missing = normalize_all(raw, context)
        tree = aggregate(scores, weights, missing, raw_values={
            k: v for k, v in raw.items() if v is not None
        })
        report["scores"] = tree.to_dict()
    return report


def vars_clean(obj) -> dict:
    out = {}
    for k, v in vars(obj).items():
        if isinstance(v, tuple):
            v = list(v)
        out[k] = v
    return out


def evaluate_trial_dir(
    trial_dir,
    context: Optional[ScoringContext] = None,
    weights: Optional[WeightConfig] = None,
    normalize: bool = True,
) -> dict:
    """Full pipeline from a trial directory on disk."""
    bundle, config = load_trial(trial_dir)
    origin = config.sensor_geodetic
    enu = bundle_to_enu(bundle, origin)
    aoi = aoi_from_config(config.aoi, origin)
    window = Interval(*config.time_window)
    return evaluate_bundle(
        enu,
        window,
        aoi,
        gate_m=float(config.association.get("gate_m", DEFAULT_GATE_M)),
        min_segment_s=float(
            config.association.get("min_segment_s", DEFAULT_MIN_SEGMENT_S)
        ),
        positive_label=config.identification.get(
            "positive_label", DEFAULT_POSITIVE_LABEL
        ),
        context=context,
        weights=weights,
        normalize=normalize,
    )
