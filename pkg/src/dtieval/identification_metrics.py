"""Identification metrics: duration-based confusion quadrants and the
derived F1 / precision / PoD / MAR / FAR scores.

The positive label is configurable (default "uav").  True negatives are
only computable when the ground truth includes negative-class objects
(simulation mode); real trials lack the flight paths of birds and other
disturbances, so FAR is reported as unavailable there.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .association import TrackAssociation
from .intervals import Interval, IntervalSet, union_all
from .model import GroundTruthTrajectory, Track

DEFAULT_POSITIVE_LABEL = "uav"


@dataclass(frozen=True)
class ConfusionDurations:
    tp_s: float
    fp_s: float
    fn_s: float
    tn_s: Optional[float]  # simulation-only
    positive_label: str


@dataclass(frozen=True)
class IdentificationMetricsReport:
    confusion: ConfusionDurations
    f1: Optional[float]
    identification_precision: Optional[float]
    pod: Optional[float]
    mar: Optional[float]
    far: Optional[float]
    unavailable: tuple[str, ...] = ()


def identification_segments(track: Track, positive_label: str) -> IntervalSet:
    """Union of maximal sample runs labeled with the positive class."""
    intervals = []
    start = None
    prev_t = None
    for s in track.samples:
        hit = s.ident == positive_label
        if hit and start is None:
            start = s.t
        elif not hit and start is not None:
            intervals.append(Interval(start, prev_t))
            start = None
        prev_t = s.t
    if start is not None:
        intervals.append(Interval(start, prev_t))
    return IntervalSet(intervals)


def confusion_durations(
    truths: list[GroundTruthTrajectory],
    tracks: list[Track],
    assoc: TrackAssociation,
    positive_label: str = DEFAULT_POSITIVE_LABEL,
) -> ConfusionDurations:
    positives = [g for g in truths if g.class_label == positive_label]
    negatives = [g for g in truths if g.class_label != positive_label]
    pos_ids = {g.object_id for g in positives}

    ident = {t.track_id: identification_segments(t, positive_label) for t in tracks}
    ranges = {t.track_id: t.time_range() for t in tracks}

    # identified track time associated to a positive-class truth
    tp_set = union_all(
        p.intervals.intersect(ident.get(tid, IntervalSet.empty()))
        for (oid, tid), p in assoc.pairs.items()
        if oid in pos_ids
    )
    identified_all = union_all(
        ranges[tid].intersect(ident[tid]) for tid in ident
    )
    fp_set = identified_all.subtract(tp_set)

    tp = tp_set.duration
    fp = fp_set.duration
    fn = max(0.0, sum(g.aoi_presence.duration for g in positives) - tp)

    tn: Optional[float] = None
    if negatives:
        # track time neither identified positive nor spent on a
        # positive-class truth: the correctly-rejected clutter time
        pos_assoc = union_all(
            p.intervals for (oid, tid), p in assoc.pairs.items() if oid in pos_ids
        )
        all_track_time = union_all(ranges.values())
        tn = all_track_time.subtract(identified_all).subtract(pos_assoc).duration
    return ConfusionDurations(
        tp_s=tp, fp_s=fp, fn_s=fn, tn_s=tn, positive_label=positive_label
    )


def _ratio(num: float, den: float) -> Optional[float]:
    if den <= 0:
        return None
    return num / den


def f1(cd: ConfusionDurations) -> Optional[float]:
    return _ratio(2 * cd.tp_s, 2 * cd.tp_s + cd.fp_s + cd.fn_s)


def precision_id(cd: ConfusionDurations) -> Optional[float]:
    return _ratio(cd.tp_s, cd.tp_s + cd.fp_s)


def recall_pod(cd: ConfusionDurations) -> Optional[float]:
    return _ratio(cd.tp_s, cd.tp_s + cd.fn_s)


def mar(cd: ConfusionDurations) -> Optional[float]:
    return _ratio(cd.fn_s, cd.tp_s + cd.fn_s)


def far(cd: ConfusionDurations) -> Optional[float]:
    if cd.tn_s is None:
        return None
    return _ratio(cd.fp_s, cd.fp_s + cd.tn_s)


def compute_identification_metrics(
    truths: list[GroundTruthTrajectory],
    tracks: list[Track],
    assoc: TrackAssociation,
    positive_label: str = DEFAULT_POSITIVE_LABEL,
) -> IdentificationMetricsReport:
    cd = confusion_durations(truths, tracks, assoc, positive_label)
    unavailable = []
    values = {
        "f1": f1(cd),
        "identification_precision": precision_id(cd),
        "pod": recall_pod(cd),
        "mar": mar(cd),
        "far": far(cd),
    }
    for name, v in values.items():
        if v is None:
            reason = "tn_unknown" if name == "far" and cd.tn_s is None else "zero_denominator"
            unavailable.append(f"{name}:{reason}")
    return IdentificationMetricsReport(
        confusion=cd,
        f1=values["f1"],
        identification_precision=values["identification_precision"],
        pod=values["pod"],
        mar=values["mar"],
        far=values["far"],
        unavailable=tuple(unavailable),
    )
