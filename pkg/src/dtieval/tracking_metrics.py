"""Tracking-component metrics computed over a TrackAssociation.

Per truth: completeness, continuity rate (via the minimal covering
subset of tracks), ambiguity, positional/velocity accuracy, longest
segment, tracking immediateness.  Global: spuriousness over the trial
window.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Optional

import numpy as np

from .association import TrackAssociation, TrackPairAssociation
from .intervals import Interval, IntervalSet, union_all
from .model import GroundTruthTrajectory, Track

_TOL = 1e-9
BRUTE_FORCE_LIMIT = 12


@dataclass(frozen=True)
class PerTruthTrackingMetrics:
    object_id: str
    track_completeness: Optional[float]
    track_continuity: Optional[float]  # track-number changes per hour
    track_ambiguity: Optional[float]
    track_positional_accuracy: Optional[float]
    track_positional_accuracy_2d: Optional[float]
    track_velocity_accuracy: Optional[float]
    longest_track_segment: float
    tracking_immediateness: Optional[float]
    minimal_subset: tuple[str, ...]
    minimal_subset_exact: bool
    velocity_samples_skipped: int = 0


@dataclass(frozen=True)
class TrackingMetricsReport:
    per_truth: tuple[PerTruthTrackingMetrics, ...]
    track_spuriousness: Optional[float]


def track_completeness(
    traj: GroundTruthTrajectory, pairs: dict[str, TrackPairAssociation]
) -> Optional[float]:
    denom = traj.aoi_presence.duration
    if denom <= 0:
        return None
    covered = union_all([p.intervals for p in pairs.values()]).duration
    return min(1.0, covered / denom)


def minimal_association_subset(
    pair_intervals: dict[str, IntervalSet],
    brute_force_limit: int = BRUTE_FORCE_LIMIT,
) -> tuple[tuple[str, ...], bool]:
    """Minimum-cardinality subset of tracks whose intervals cover the
    full union of all association intervals.

    Greedy interval-cover is provably optimal when every track
    contributes a single interval.  With multi-segment tracks an
    exhaustive search is used up to `brute_force_limit` tracks; beyond
    that the greedy answer is returned flagged as possibly inexact.
    Returns (track ids, exact).
    """
    pair_intervals = {tid: s for tid, s in pair_intervals.items() if s}
    if not pair_intervals:
        return (), True
    target = union_all(pair_intervals.values())

    single = all(len(s.intervals) == 1 for s in pair_intervals.values())
    if single:
        return _greedy_cover(pair_intervals, target), True
    if len(pair_intervals) <= brute_force_limit:
        return _exhaustive_cover(pair_intervals, target), True
    return _greedy_cover(pair_intervals, target), False


def _covers(chosen: dict[str, IntervalSet], target: IntervalSet) -> bool:
    return target.subtract(union_all(chosen.values())).duration <= _TOL


def _exhaustive_cover(
    pair_intervals: dict[str, IntervalSet], target: IntervalSet
) -> tuple[str, ...]:
    ids = sorted(pair_intervals)
    for size in range(1, len(ids) + 1):
        for combo in combinations(ids, size):
            subset = {tid: pair_intervals[tid] for tid in combo}
            if _covers(subset, target):
                return combo
    return tuple(ids)


def _reach(s: IntervalSet, pos: float) -> Optional[float]:
    """End of the interval of s containing pos, if any."""
    for iv in s.intervals:
        if iv.start <= pos + _TOL and iv.end > pos + _TOL:
            return iv.end
    return None


def _greedy_cover(
    pair_intervals: dict[str, IntervalSet], target: IntervalSet
) -> tuple[str, ...]:
    chosen: list[str] = []
    for comp in target.intervals:
        pos = comp.start
        while pos < comp.end - _TOL:
            # coverage already paid for by previously chosen tracks is free
            extended = True
            while extended:
                extended = False
                for tid in chosen:
                    r = _reach(pair_intervals[tid], pos)
                    if r is not None and r > pos + _TOL:
                        pos = min(r, comp.end)
                        extended = True
            if pos >= comp.end - _TOL:
                break
            best = None
            for tid, s in pair_intervals.items():
                r = _reach(s, pos)
                if r is None:
                    continue
                key = (r, s.duration, _NegStr(tid))
                if best is None or key > best[0]:
                    best = (key, tid, r)
            if best is None:
                # target is the union of the inputs, so a cover exists
                raise AssertionError("uncovered point inside association union")
            chosen.append(best[1])
            pos = min(best[2], comp.end)
    return tuple(chosen)


class _NegStr(str):
    """Orders strings reversed, so max() prefers the lower id."""

    def __lt__(self, other):
        return str.__gt__(self, other)

    def __gt__(self, other):
        return str.__lt__(self, other)


def track_continuity(
    pairs: dict[str, TrackPairAssociation],
) -> tuple[Optional[float], tuple[str, ...], bool]:
    """(changes per hour, minimal subset, exact flag)."""
    if not pairs:
        return None, (), True
    union = union_all([p.intervals for p in pairs.values()])
    if union.duration <= 0:
        return None, (), True
    subset, exact = minimal_association_subset(
        {tid: p.intervals for tid, p in pairs.items()}
    )
    hours = union.duration / 3600.0
    return (len(subset) - 1) / hours, subset, exact


def _breakpoints(sets: list[IntervalSet], window: Optional[Interval] = None) -> list[float]:
    pts = set()
    for s in sets:
        for iv in s.intervals:
            pts.add(iv.start)
            pts.add(iv.end)
    if window is not None:
        pts = {min(max(p, window.start), window.end) for p in pts}
        pts.add(window.start)
        pts.add(window.end)
    return sorted(pts)


def track_ambiguity(pairs: dict[str, TrackPairAssociation]) -> Optional[float]:
    """Time-weighted mean track count while at least one track covers
    the truth."""
    if not pairs:
        return None
    sets = [p.intervals for p in pairs.values()]
    pts = _breakpoints(sets)
    num = 0.0
    den = 0.0
    for lo, hi in zip(pts, pts[1:]):
        if hi - lo <= _TOL:
            continue
        mid = 0.5 * (lo + hi)
        count = sum(1 for s in sets if s.contains(mid))
        if count >= 1:
            num += count * (hi - lo)
            den += hi - lo
    if den <= 0:
        return None
    return num / den


def track_spuriousness(
    tracks: list[Track], assoc: TrackAssociation, window: Interval
) -> Optional[float]:
    """Time-weighted mean fraction of existing tracks that represent no
    truth, over the trial window."""
    win = IntervalSet([window])
    ranges = {t.track_id: t.time_range().intersect(win) for t in tracks}
    assoc_unions = {
        t.track_id: assoc.track_association_union(t.track_id).intersect(win)
        for t in tracks
    }
    sets = list(ranges.values()) + list(assoc_unions.values())
    pts = _breakpoints(sets, window)
    num = 0.0
    den = 0.0
    for lo, hi in zip(pts, pts[1:]):
        if hi - lo <= _TOL:
            continue
        mid = 0.5 * (lo + hi)
        n_t = sum(1 for s in ranges.values() if s.contains(mid))
        if n_t == 0:
            continue
        n_a = sum(
            1
            for tid in ranges
            if ranges[tid].contains(mid) and assoc_unions[tid].contains(mid)
        )
        num += ((n_t - n_a) / n_t) * (hi - lo)
        den += hi - lo
    if den <= 0:
        return None
    return num / den


def track_positional_accuracy(
    pairs: dict[str, TrackPairAssociation], mode: str = "3d"
) -> Optional[float]:
    """Per-track RMS over associated samples, combined weighted by the
    association duration of each track."""
    num = 0.0
    den = 0.0
    for p in pairs.values():
        if not p.samples:
            continue
        w = p.intervals.duration
        if w <= 0:
            continue
        if mode == "2d":
            sq = [s.distance_2d**2 for s in p.samples]
        else:
            sq = [s.distance_3d**2 for s in p.samples]
        acc_sq = sum(sq) / len(sq)
        num += w * acc_sq
        den += w
    if den <= 0:
        return None
    return math.sqrt(num / den)


def track_velocity_accuracy(
    pairs: dict[str, TrackPairAssociation],
) -> tuple[Optional[float], int]:
    """Unweighted RMS speed error over all associated samples.

    Samples lacking both a reported and a derivable track velocity are
    skipped; the skip count is returned for diagnostics.
    """
    sq = []
    skipped = 0
    for p in pairs.values():
        for s in p.samples:
            if s.track_velocity is None:
                skipped += 1
                continue
            sq.append(float(np.linalg.norm(s.track_velocity - s.truth_velocity)) ** 2)
    if not sq:
        return None, skipped
    return math.sqrt(sum(sq) / len(sq)), skipped


def longest_track_segment(
    traj: GroundTruthTrajectory, pairs: dict[str, TrackPairAssociation]
) -> float:
    denom = traj.aoi_presence.duration
    if denom <= 0 or not pairs:
        return 0.0
    return max(p.intervals.duration for p in pairs.values()) / denom


def tracking_immediateness(
    traj: GroundTruthTrajectory, pairs: dict[str, TrackPairAssociation]
) -> Optional[float]:
    """Start of the earliest association minus first AoI entry time."""
    starts = [p.intervals.start for p in pairs.values() if p.intervals]
    if not starts or not traj.aoi_presence:
        return None
    return min(starts) - traj.aoi_presence.start


def compute_tracking_metrics(
    truths: list[GroundTruthTrajectory],
    tracks: list[Track],
    assoc: TrackAssociation,
    window: Interval,
) -> TrackingMetricsReport:
    per_truth = []
    for traj in sorted(truths, key=lambda g: g.object_id):
        pairs = assoc.for_truth(traj.object_id)
        continuity, subset, exact = track_continuity(pairs)
        vel_acc, skipped = track_velocity_accuracy(pairs)
        per_truth.append(
            PerTruthTrackingMetrics(
                object_id=traj.object_id,
                track_completeness=track_completeness(traj, pairs),
                track_continuity=continuity,
                track_ambiguity=track_ambiguity(pairs),
                track_positional_accuracy=track_positional_accuracy(pairs, "3d"),
                track_positional_accuracy_2d=track_positional_accuracy(pairs, "2d"),
                track_velocity_accuracy=vel_acc,
                longest_track_segment=longest_track_segment(traj, pairs),
                tracking_immediateness=tracking_immediateness(traj, pairs),
                minimal_subset=subset,
                minimal_subset_exact=exact,
                velocity_samples_skipped=skipped,
            )
        )
    return TrackingMetricsReport(
        per_truth=tuple(per_truth),
        track_spuriousness=track_spuriousness(tracks, assoc, window),
    )
