"""Interval-set algebra over time.

All time quantities are seconds relative to the scenario epoch (t=0).
An IntervalSet is kept in canonical form: intervals sorted by start,
pairwise disjoint, with gaps strictly larger than MERGE_EPS.  Every
duration in the metric suite is computed on these sets.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

# Intervals closer than this are merged; avoids degenerate slivers from
# floating-point sampling.
MERGE_EPS = 1e-6


@dataclass(frozen=True)
class Interval:
    start: float
    end: float

    def __post_init__(self):
        if not (self.start <= self.end):
            raise ValueError(f"interval start {self.start} > end {self.end}")

    @property
    def duration(self) -> float:
        return self.end - self.start

    def contains(self, t: float, tol: float = 0.0) -> bool:
        return self.start - tol <= t <= self.end + tol


class IntervalSet:
    """Canonical disjoint union of closed time intervals."""

    __slots__ = ("intervals",)

    def __init__(self, intervals: Iterable[Interval] = ()):
        self.intervals: tuple[Interval, ...] = _canonicalize(intervals)

    @classmethod
    def from_pairs(cls, pairs: Iterable[Sequence[float]]) -> "IntervalSet":
        return cls(Interval(float(s), float(e)) for s, e in pairs)

    @classmethod
    def empty(cls) -> "IntervalSet":
        return cls(())

    def __bool__(self) -> bool:
        return bool(self.intervals)

    def __eq__(self, other) -> bool:
        return isinstance(other, IntervalSet) and self.intervals == other.intervals

    def __hash__(self):
        return hash(self.intervals)

    def __repr__(self):
        body = ", ".join(f"[{i.start:g},{i.end:g}]" for i in self.intervals)
        return f"IntervalSet({{{body}}})"

    @property
    def duration(self) -> float:
        return sum(i.duration for i in self.intervals)

    @property
    def start(self) -> float:
        if not self.intervals:
            raise ValueError("empty interval set has no start")
        return self.intervals[0].start

    @property
    def end(self) -> float:
        if not self.intervals:
            raise ValueError("empty interval set has no end")
        return self.intervals[-1].end

    def contains(self, t: float, tol: float = 0.0) -> bool:
        return any(i.contains(t, tol) for i in self.intervals)

    def union(self, other: "IntervalSet") -> "IntervalSet":
        return IntervalSet(self.intervals + other.intervals)

    def intersect(self, other: "IntervalSet") -> "IntervalSet":
        out = []
        a, b = self.intervals, other.intervals
        i = j = 0
        while i < len(a) and j < len(b):
            lo = max(a[i].start, b[j].start)
            hi = min(a[i].end, b[j].end)
            if hi > lo:
                out.append(Interval(lo, hi))
            if a[i].end < b[j].end:
                i += 1
            else:
                j += 1
        return IntervalSet(out)

    def subtract(self, other: "IntervalSet") -> "IntervalSet":
        out = []
        for iv in self.intervals:
            cursor = iv.start
            for cut in other.intervals:
                if cut.end <= cursor:
                    continue
                if cut.start >= iv.end:
                    break
                if cut.start > cursor:
                    out.append(Interval(cursor, min(cut.start, iv.end)))
                cursor = max(cursor, cut.end)
                if cursor >= iv.end:
                    break
            if cursor < iv.end:
                out.append(Interval(cursor, iv.end))
        return IntervalSet(out)

    def to_pairs(self) -> list[tuple[float, float]]:
        return [(i.start, i.end) for i in self.intervals]


def _canonicalize(intervals: Iterable[Interval]) -> tuple[Interval, ...]:
    items = sorted(intervals, key=lambda i: (i.start, i.end))
    merged: list[list[float]] = []
    for iv in items:
        if merged and iv.start <= merged[-1][1] + MERGE_EPS:
            merged[-1][1] = max(merged[-1][1], iv.end)
        else:
            merged.append([iv.start, iv.end])
    return tuple(Interval(s, e) for s, e in merged if e - s > MERGE_EPS)


def union_all(sets: Iterable[IntervalSet]) -> IntervalSet:
    acc: list[Interval] = []
    for s in sets:
        acc.extend(s.intervals)
    return IntervalSet(acc)
