"""Association of DTI output to ground truth.

Detections: nearest-neighbor with a hard Euclidean 3D gate, one truth
per detection at most.  Tracks: per-sample nearest neighbor, runs of
consecutive same-truth samples become association segments, short
segments are dropped, and the result is clipped to the truth's AoI
presence.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import OutOfRange
from .intervals import Interval, IntervalSet
from .model import Detection, GroundTruthTrajectory, Track, distance

DEFAULT_GATE_M = 50.0
DEFAULT_MIN_SEGMENT_S = 1.0


@dataclass(frozen=True)
class AssociatedDetection:
    detection: Detection
    truth_position: np.ndarray
    distance_2d: float
    distance_3d: float


@dataclass
class DetectionAssociation:
    n_detections: int
    # detection_id -> object_id (only associated detections appear)
    by_detection: dict[str, str] = field(default_factory=dict)
    # object_id -> associated detections, in time order
    by_truth: dict[str, list[AssociatedDetection]] = field(default_factory=dict)

    @property
    def n_associated(self) -> int:
        return len(self.by_detection)

    def associated(self, object_id: str) -> list[AssociatedDetection]:
        return self.by_truth.get(object_id, [])


def associate_detections(
    truths: list[GroundTruthTrajectory],
    detections: list[Detection],
    gate_m: float = DEFAULT_GATE_M,
) -> DetectionAssociation:
    """Each detection goes to the 3D-nearest truth within the gate.

    Ties break toward the lexicographically lower object_id.
    """
    if gate_m <= 0:
        raise ValueError("gate_m must be > 0")
    assoc = DetectionAssociation(n_detections=len(detections))
    for det in detections:
        best: Optional[tuple[float, str, np.ndarray]] = None
        for traj in sorted(truths, key=lambda g: g.object_id):
            try:
                pos, _ = traj.sample_at(det.t)
            except OutOfRange:
                continue
            d3 = distance(det.position, pos, "3d")
            if d3 > gate_m:
                continue
            if best is None or d3 < best[0]:
                best = (d3, traj.object_id, pos)
        if best is not None:
            d3, oid, pos = best
            assoc.by_detection[det.detection_id] = oid
            assoc.by_truth.setdefault(oid, []).append(
                AssociatedDetection(
                    detection=det,
                    truth_position=pos,
                    distance_2d=distance(det.position, pos, "2d"),
                    distance_3d=d3,
                )
            )
    for items in assoc.by_truth.values():
        items.sort(key=lambda a: a.detection.t)
    return assoc


@dataclass(frozen=True)
class AssociatedTrackSample:
    t: float
    track_position: np.ndarray
    truth_position: np.ndarray
    track_velocity: Optional[np.ndarray]
    truth_velocity: np.ndarray

    @property
    def distance_2d(self) -> float:
        return distance(self.track_position, self.truth_position, "2d")

    @property
    def distance_3d(self) -> float:
        return distance(self.track_position, self.truth_position, "3d")


@dataclass
class TrackPairAssociation:
    object_id: str
    track_id: str
    intervals: IntervalSet
    samples: list[AssociatedTrackSample]


@dataclass
class TrackAssociation:
    # (object_id, track_id) -> pair association with nonempty intervals
    pairs: dict[tuple[str, str], TrackPairAssociation] = field(default_factory=dict)

    def for_truth(self, object_id: str) -> dict[str, TrackPairAssociation]:
        return {
            tid: p for (oid, tid), p in self.pairs.items() if oid == object_id
        }

    def track_association_union(self, track_id: str) -> IntervalSet:
        out = IntervalSet.empty()
        for (oid, tid), p in self.pairs.items():
            if tid == track_id:
                out = out.union(p.intervals)
        return out


def associate_tracks(
    truths: list[GroundTruthTrajectory],
    tracks: list[Track],
    gate_m: float = DEFAULT_GATE_M,
    min_segment_s: float = DEFAULT_MIN_SEGMENT_S,
) -> TrackAssociation:
    """Per-sample nearest-neighbor gating, segment formation, flicker
    suppression, then clipping to AoI presence."""
    if gate_m <= 0:
        raise ValueError("gate_m must be > 0")
    if min_segment_s < 0:
        raise ValueError("min_segment_s must be >= 0")

    ordered = sorted(truths, key=lambda g: g.object_id)
    assoc = TrackAssociation()
    for track in tracks:
        labels: list[Optional[str]] = []
        cache: list[Optional[tuple[np.ndarray, np.ndarray]]] = []
        for k, s in enumerate(track.samples):
            best = None
            for traj in ordered:
                try:
                    pos, vel = traj.sample_at(s.t)
                except OutOfRange:
                    continue
                d3 = distance(s.position, pos, "3d")
                if d3 > gate_m:
                    continue
                if best is None or d3 < best[0]:
                    best = (d3, traj.object_id, pos, vel)
            if best is None:
                labels.append(None)
                cache.append(None)
            else:
                labels.append(best[1])
                cache.append((best[2], best[3]))

        for oid, start, stop in _runs(labels):
            t_first = track.samples[start].t
            t_last = track.samples[stop - 1].t
            if t_last - t_first < min_segment_s:
                continue
            traj = next(g for g in ordered if g.object_id == oid)
            segment = IntervalSet([Interval(t_first, t_last)]).intersect(
                traj.aoi_presence
            )
            if not segment:
                continue
            samples = [
                AssociatedTrackSample(
                    t=track.samples[k].t,
                    track_position=track.samples[k].position,
                    truth_position=cache[k][0],
                    track_velocity=track.velocity_at_index(k),
                    truth_velocity=cache[k][1],
                )
                for k in range(start, stop)
                if segment.contains(track.samples[k].t, tol=1e-9)
            ]
            key = (oid, track.track_id)
            if key in assoc.pairs:
                pair = assoc.pairs[key]
                pair.intervals = pair.intervals.union(segment)
                pair.samples.extend(samples)
            else:
                assoc.pairs[key] = TrackPairAssociation(
                    object_id=oid,
                    track_id=track.track_id,
                    intervals=segment,
                    samples=samples,
                )
    for pair in assoc.pairs.values():
        pair.samples.sort(key=lambda s: s.t)
    return assoc


def _runs(labels: list[Optional[str]]):
    """Maximal runs of identical non-None labels as (label, start, stop)."""
    start = 0
    for k in range(1, len(labels) + 1):
        if k == len(labels) or labels[k] != labels[start]:
            if labels[start] is not None:
                yield labels[start], start, k
            start = k
