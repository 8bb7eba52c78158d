"""Domain types shared by the whole pipeline.

Positions are 3-vectors in meters, East-North-Up relative to the trial
origin once the geo transform has run; ingest produces the same types
with raw geodetic triples (lat, lon, alt) stored in the position slot
until then.  All types are immutable after construction and safe to
share across threads.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .errors import OutOfRange
from .intervals import Interval, IntervalSet

CLASS_LABELS = ("uav", "bird", "other")


@dataclass(frozen=True)
class TrajectorySample:
    t: float
    position: np.ndarray  # shape (3,)
    velocity: Optional[np.ndarray] = None  # shape (3,), m/s

    def __post_init__(self):
        object.__setattr__(self, "position", np.asarray(self.position, dtype=float))
        if self.velocity is not None:
            object.__setattr__(self, "velocity", np.asarray(self.velocity, dtype=float))


@dataclass(frozen=True)
class GroundTruthTrajectory:
    object_id: str
    class_label: str
    samples: tuple[TrajectorySample, ...]
    aoi_presence: IntervalSet = None  # type: ignore[assignment]

    def __post_init__(self):
        object.__setattr__(self, "samples", tuple(self.samples))
        if len(self.samples) < 2:
            raise ValueError(f"trajectory {self.object_id}: needs >= 2 samples")
        times = [s.t for s in self.samples]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError(f"trajectory {self.object_id}: times not strictly increasing")
        if self.class_label not in CLASS_LABELS:
            raise ValueError(f"trajectory {self.object_id}: bad class {self.class_label!r}")
        if self.aoi_presence is None:
            object.__setattr__(
                self, "aoi_presence", IntervalSet([Interval(times[0], times[-1])])
            )

    @property
    def start_time(self) -> float:
        return self.samples[0].t

    @property
    def end_time(self) -> float:
        return self.samples[-1].t

    def with_presence(self, presence: IntervalSet) -> "GroundTruthTrajectory":
        return replace(self, aoi_presence=presence)

    def sample_at(self, t: float) -> tuple[np.ndarray, np.ndarray]:
        """Interpolated (position, velocity) at time t.

        Position is piecewise linear.  Velocity is the interpolation of
        stored velocities when available, otherwise the slope of the
        bracketing leg (central difference at interior sample points).
        """
        if t < self.start_time or t > self.end_time:
            raise OutOfRange(
                f"t={t} outside [{self.start_time}, {self.end_time}] for {self.object_id}"
            )
        times = [s.t for s in self.samples]
        k = _bracket(times, t)
        a, b = self.samples[k], self.samples[k + 1]
        if t == a.t:
            pos = a.position
        elif t == b.t:
            pos = b.position
        else:
            w = (t - a.t) / (b.t - a.t)
            pos = a.position + w * (b.position - a.position)

        if a.velocity is not None and b.velocity is not None:
            if t == a.t:
                vel = a.velocity
            elif t == b.t:
                vel = b.velocity
            else:
                w = (t - a.t) / (b.t - a.t)
                vel = a.velocity + w * (b.velocity - a.velocity)
        else:
            vel = self._fd_velocity(k, t)
        return pos, vel

    def _fd_velocity(self, k: int, t: float) -> np.ndarray:
        slope = lambda i: (self.samples[i + 1].position - self.samples[i].position) / (
            self.samples[i + 1].t - self.samples[i].t
        )
        # central difference at interior sample points, leg slope elsewhere
        if t == self.samples[k].t and 0 < k:
            return 0.5 * (slope(k - 1) + slope(k))
        if t == self.samples[k + 1].t and k + 2 < len(self.samples):
            return 0.5 * (slope(k) + slope(k + 1))
        return slope(k)


@dataclass(frozen=True)
class Detection:
    detection_id: str
    t: float
    position: np.ndarray
    sensor_id: str

    def __post_init__(self):
        pos = np.asarray(self.position, dtype=float)
        if not np.all(np.isfinite(pos)):
            raise ValueError(f"detection {self.detection_id}: non-finite position")
        object.__setattr__(self, "position", pos)


@dataclass(frozen=True)
class TrackSample:
    t: float
    position: np.ndarray
    velocity: Optional[np.ndarray] = None
    ident: Optional[str] = None
    confidence: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "position", np.asarray(self.position, dtype=float))
        if self.velocity is not None:
            object.__setattr__(self, "velocity", np.asarray(self.velocity, dtype=float))


@dataclass(frozen=True)
class Track:
    track_id: str
    samples: tuple[TrackSample, ...]

    def __post_init__(self):
        object.__setattr__(self, "samples", tuple(self.samples))
        if not self.samples:
            raise ValueError(f"track {self.track_id}: needs >= 1 sample")
        times = [s.t for s in self.samples]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError(f"track {self.track_id}: times not strictly increasing")

    @property
    def start_time(self) -> float:
        return self.samples[0].t

    @property
    def end_time(self) -> float:
        return self.samples[-1].t

    def time_range(self) -> IntervalSet:
        if self.end_time > self.start_time:
            return IntervalSet([Interval(self.start_time, self.end_time)])
        return IntervalSet.empty()

    def velocity_at_index(self, k: int) -> Optional[np.ndarray]:
        """Reported velocity, else finite difference of neighbor positions."""
        s = self.samples[k]
        if s.velocity is not None:
            return s.velocity
        lo = max(0, k - 1)
        hi = min(len(self.samples) - 1, k + 1)
        if hi == lo:
            return None
        a, b = self.samples[lo], self.samples[hi]
        return (b.position - a.position) / (b.t - a.t)


@dataclass(frozen=True)
class SensorPose:
    position: np.ndarray  # ENU meters

    def __post_init__(self):
        pos = np.asarray(self.position, dtype=float)
        if not np.all(np.isfinite(pos)):
            raise ValueError("non-finite sensor position")
        object.__setattr__(self, "position", pos)


@dataclass(frozen=True)
class TrialBundle:
    ground_truths: tuple[GroundTruthTrajectory, ...]
    detections: tuple[Detection, ...]
    tracks: tuple[Track, ...]
    sensor: SensorPose
    trial_id: str = "trial"
    dti_id: str = "dti"

    def __post_init__(self):
        object.__setattr__(self, "ground_truths", tuple(self.ground_truths))
        object.__setattr__(self, "detections", tuple(self.detections))
        object.__setattr__(self, "tracks", tuple(self.tracks))
        gt_ids = [g.object_id for g in self.ground_truths]
        if len(set(gt_ids)) != len(gt_ids):
            raise ValueError("duplicate ground-truth object ids")
        tr_ids = [t.track_id for t in self.tracks]
        if len(set(tr_ids)) != len(tr_ids):
            raise ValueError("duplicate track ids")


def _bracket(times: Sequence[float], t: float) -> int:
    """Index k with times[k] <= t <= times[k+1]."""
    import bisect

    k = bisect.bisect_right(times, t) - 1
    return min(max(k, 0), len(times) - 2)


def distance(p: np.ndarray, q: np.ndarray, mode: str = "3d") -> float:
    d = p - q
    if mode == "2d":
        return math.hypot(d[0], d[1])
    return float(np.linalg.norm(d))
