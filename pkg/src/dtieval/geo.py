"""Geodesy and pre-processing: WGS-84 to local ENU, time-window
filtering and area-of-interest selection."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from shapely.geometry import Point, Polygon

from .errors import EmptyWindow, InvalidCoordinate
from .intervals import Interval, IntervalSet, union_all
from .model import (
    Detection,
    GroundTruthTrajectory,
    Track,
    TrialBundle,
)

# WGS-84 ellipsoid
_A = 6378137.0
_F = 1.0 / 298.257223563
_B = _A * (1.0 - _F)
_E2 = _F * (2.0 - _F)

AOI_CROSSING_TOL_S = 1e-3


def geodetic_to_ecef(lat_deg: float, lon_deg: float, alt_m: float) -> np.ndarray:
    if not (abs(lat_deg) <= 90.0 and abs(lon_deg) <= 180.0) or not math.isfinite(alt_m):
        raise InvalidCoordinate(f"bad geodetic ({lat_deg}, {lon_deg}, {alt_m})")
    lat = math.radians(lat_deg)
    lon = math.radians(lon_deg)
    n = _A / math.sqrt(1.0 - _E2 * math.sin(lat) ** 2)
    x = (n + alt_m) * math.cos(lat) * math.cos(lon)
    y = (n + alt_m) * math.cos(lat) * math.sin(lon)
    z = (n * (1.0 - _E2) + alt_m) * math.sin(lat)
    return np.array([x, y, z])


def ecef_to_geodetic(xyz: np.ndarray) -> tuple[float, float, float]:
    x, y, z = float(xyz[0]), float(xyz[1]), float(xyz[2])
    lon = math.atan2(y, x)
    p = math.hypot(x, y)
    # Bowring's method, iterated to convergence
    lat = math.atan2(z, p * (1.0 - _E2))
    for _ in range(10):
        n = _A / math.sqrt(1.0 - _E2 * math.sin(lat) ** 2)
        alt = p / math.cos(lat) - n if abs(lat) < math.pi / 2 - 1e-9 else z / math.sin(lat) - n * (1 - _E2)
        new_lat = math.atan2(z, p * (1.0 - _E2 * n / (n + alt)))
        if abs(new_lat - lat) < 1e-14:
            lat = new_lat
            break
        lat = new_lat
    n = _A / math.sqrt(1.0 - _E2 * math.sin(lat) ** 2)
    alt = p / math.cos(lat) - n if abs(lat) < math.pi / 2 - 1e-9 else z / math.sin(lat) - n * (1 - _E2)
    return math.degrees(lat), math.degrees(lon), alt


def _enu_rotation(lat_deg: float, lon_deg: float) -> np.ndarray:
    lat = math.radians(lat_deg)
    lon = math.radians(lon_deg)
    sl, cl = math.sin(lat), math.cos(lat)
    so, co = math.sin(lon), math.cos(lon)
    return np.array(
        [
            [-so, co, 0.0],
            [-sl * co, -sl * so, cl],
            [cl * co, cl * so, sl],
        ]
    )


def geodetic_to_enu(
    lat_deg: float, lon_deg: float, alt_m: float, origin: tuple[float, float, float]
) -> np.ndarray:
    """ENU meters in the local tangent plane at origin (lat, lon, alt)."""
    ecef = geodetic_to_ecef(lat_deg, lon_deg, alt_m)
    ecef0 = geodetic_to_ecef(*origin)
    return _enu_rotation(origin[0], origin[1]) @ (ecef - ecef0)


def enu_to_geodetic(
    enu: np.ndarray, origin: tuple[float, float, float]
) -> tuple[float, float, float]:
    ecef0 = geodetic_to_ecef(*origin)
    ecef = ecef0 + _enu_rotation(origin[0], origin[1]).T @ np.asarray(enu, dtype=float)
    return ecef_to_geodetic(ecef)


@dataclass(frozen=True)
class AreaOfInterest:
    """Circle or simple polygon in the EN plane with altitude bounds."""

    shape: str  # "circle" | "polygon"
    alt_min_m: float
    alt_max_m: float
    center_en: Optional[np.ndarray] = None
    radius_m: Optional[float] = None
    vertices_en: Optional[np.ndarray] = None  # shape (n, 2)
    ignore_altitude: bool = False

    def __post_init__(self):
        if self.alt_min_m >= self.alt_max_m:
            raise ValueError("AoI altitude bounds: min must be < max")
        if self.shape == "circle":
            if self.radius_m is None or self.radius_m <= 0:
                raise ValueError("circle AoI needs radius > 0")
            object.__setattr__(self, "center_en", np.asarray(self.center_en, dtype=float))
        elif self.shape == "polygon":
            verts = np.asarray(self.vertices_en, dtype=float)
            poly = Polygon(verts)
            if not poly.is_valid:
                raise ValueError("polygon AoI must be simple and non-self-intersecting")
            object.__setattr__(self, "vertices_en", verts)
            object.__setattr__(self, "_poly", poly)
        else:
            raise ValueError(f"unknown AoI shape {self.shape!r}")

    def contains(self, position: np.ndarray) -> bool:
        if not self.ignore_altitude:
            if not (self.alt_min_m <= position[2] <= self.alt_max_m):
                return False
        if self.shape == "circle":
            d = math.hypot(position[0] - self.center_en[0], position[1] - self.center_en[1])
            return d <= self.radius_m
        return self._poly.covers(Point(position[0], position[1]))  # type: ignore[attr-defined]


@dataclass(frozen=True)
class ClipResult:
    bundle: TrialBundle
    window: Interval
    dropped_truths: tuple[str, ...]


def aoi_presence(
    traj: GroundTruthTrajectory, window: Interval, aoi: AreaOfInterest
) -> IntervalSet:
    """Times the interpolated truth position is inside both AoI and window.

    Boundary crossings between bracketing samples are located by
    bisection to AOI_CROSSING_TOL_S.
    """
    t0 = max(traj.start_time, window.start)
    t1 = min(traj.end_time, window.end)
    if t1 <= t0:
        return IntervalSet.empty()

    probe_times = [t0] + [s.t for s in traj.samples if t0 < s.t < t1] + [t1]
    inside = [aoi.contains(traj.sample_at(t)[0]) for t in probe_times]

    def crossing(lo: float, hi: float, lo_inside: bool) -> float:
        while hi - lo > AOI_CROSSING_TOL_S:
            mid = 0.5 * (lo + hi)
            if aoi.contains(traj.sample_at(mid)[0]) == lo_inside:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)

    intervals = []
    entry = probe_times[0] if inside[0] else None
    for k in range(1, len(probe_times)):
        if inside[k] == inside[k - 1]:
            continue
        tc = crossing(probe_times[k - 1], probe_times[k], inside[k - 1])
        if inside[k]:
            entry = tc
        else:
            intervals.append(Interval(entry, tc))
            entry = None
    if entry is not None:
        intervals.append(Interval(entry, probe_times[-1]))
    return IntervalSet(intervals)


def clip_to_window_and_aoi(
    bundle: TrialBundle, window: Interval, aoi: AreaOfInterest
) -> ClipResult:
    """Window-filter detections/tracks, attach per-truth AoI presence.

    Truths never inside the AoI are dropped and reported.
    """
    if window.end <= window.start:
        raise EmptyWindow(f"window [{window.start}, {window.end}]")

    kept_truths = []
    dropped = []
    for traj in bundle.ground_truths:
        presence = aoi_presence(traj, window, aoi)
        if presence:
            kept_truths.append(traj.with_presence(presence))
        else:
            dropped.append(traj.object_id)

    detections = tuple(
        d for d in bundle.detections if window.start <= d.t <= window.end
    )
    tracks = []
    for tr in bundle.tracks:
        samples = tuple(s for s in tr.samples if window.start <= s.t <= window.end)
        if samples:
            tracks.append(Track(tr.track_id, samples))

    clipped = replace(
        bundle,
        ground_truths=tuple(kept_truths),
        detections=detections,
        tracks=tuple(tracks),
    )
    return ClipResult(bundle=clipped, window=window, dropped_truths=tuple(dropped))


def total_presence(truths) -> IntervalSet:
    return union_all([t.aoi_presence for t in truths])
