"""Detection-component metrics computed over a DetectionAssociation.

Per ground truth: RMS location accuracy (2D/3D), near/far range ratios,
detection immediateness.  Global: detection precision.  A field is None
when the metric is undefined for that truth (e.g. no associated
detections); the scoring layer renormalizes over present metrics.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .association import DetectionAssociation
from .model import GroundTruthTrajectory, SensorPose, distance


@dataclass(frozen=True)
class PerTruthDetectionMetrics:
    object_id: str
    location_accuracy_2d: Optional[float]
    location_accuracy_3d: Optional[float]
    range_ratio_near: Optional[float]
    range_ratio_far: Optional[float]
    detection_immediateness: Optional[float]
    degenerate_range: bool = False


@dataclass(frozen=True)
class DetectionMetricsReport:
    per_truth: tuple[PerTruthDetectionMetrics, ...]
    detection_precision: Optional[float]


def location_accuracy(
    traj: GroundTruthTrajectory, assoc: DetectionAssociation, mode: str
) -> Optional[float]:
    """RMS distance over the truth's associated detections; None if none."""
    items = assoc.associated(traj.object_id)
    if not items:
        return None
    if mode == "2d":
        sq = [a.distance_2d**2 for a in items]
    else:
        sq = [a.distance_3d**2 for a in items]
    return math.sqrt(sum(sq) / len(sq))


def flight_path_range_extremes(
    traj: GroundTruthTrajectory, sensor: SensorPose
) -> tuple[float, float]:
    """(min, max) distance from the sensor over the piecewise-linear path.

    Per leg the maximum is at an endpoint; the minimum may be at the
    interior projection of the sensor onto the leg.
    """
    s = sensor.position
    dmin = math.inf
    dmax = 0.0
    for a, b in zip(traj.samples, traj.samples[1:]):
        pa, pb = a.position, b.position
        da = float(np.linalg.norm(pa - s))
        db = float(np.linalg.norm(pb - s))
        dmax = max(dmax, da, db)
        leg = pb - pa
        denom = float(leg @ leg)
        if denom > 0:
            w = float((s - pa) @ leg) / denom
            if 0.0 < w < 1.0:
                dmin = min(dmin, float(np.linalg.norm(pa + w * leg - s)))
        dmin = min(dmin, da, db)
    return dmin, dmax


def range_ratio(
    traj: GroundTruthTrajectory,
    assoc: DetectionAssociation,
    sensor: SensorPose,
    which: str,
) -> Optional[float]:
    """Near/far range ratio, 1 being best for both.

    Detection distances use the truth position associated to the
    detection at its timestamp, keeping the ratio inside [0, 1].
    """
    items = assoc.associated(traj.object_id)
    if not items:
        return None
    dmin, dmax = flight_path_range_extremes(traj, sensor)
    span = dmax - dmin
    if span <= 0:
        return None
    dists = [float(np.linalg.norm(a.truth_position - sensor.position)) for a in items]
    if which == "near":
        value = (dmax - min(dists)) / span
    else:
        value = (max(dists) - dmin) / span
    return min(1.0, max(0.0, value))


def detection_precision(assoc: DetectionAssociation) -> Optional[float]:
    """Fraction of all detections that represent a true object."""
    if assoc.n_detections == 0:
        return None
    return assoc.n_associated / assoc.n_detections


def detection_immediateness(
    traj: GroundTruthTrajectory, assoc: DetectionAssociation
) -> Optional[float]:
    """First associated detection time minus first AoI entry time.

    Positive means late; negative means detected before entry.
    """
    items = assoc.associated(traj.object_id)
    if not items or not traj.aoi_presence:
        return None
    return items[0].detection.t - traj.aoi_presence.start


def compute_detection_metrics(
    truths: list[GroundTruthTrajectory],
    assoc: DetectionAssociation,
    sensor: SensorPose,
) -> DetectionMetricsReport:
    per_truth = []
    for traj in sorted(truths, key=lambda g: g.object_id):
        dmin, dmax = flight_path_range_extremes(traj, sensor)
        per_truth.append(
            PerTruthDetectionMetrics(
                object_id=traj.object_id,
                location_accuracy_2d=location_accuracy(traj, assoc, "2d"),
                location_accuracy_3d=location_accuracy(traj, assoc, "3d"),
                range_ratio_near=range_ratio(traj, assoc, sensor, "near"),
                range_ratio_far=range_ratio(traj, assoc, sensor, "far"),
                detection_immediateness=detection_immediateness(traj, assoc),
                degenerate_range=(dmax - dmin) <= 0,
            )
        )
    return DetectionMetricsReport(
        per_truth=tuple(per_truth),
        detection_precision=detection_precision(assoc),
    )
