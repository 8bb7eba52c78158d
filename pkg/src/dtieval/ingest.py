"""File ingestion: line-oriented JSON records for ground truth,
detections and tracks, plus the trial.json descriptor.

Timestamps in data files are either seconds relative to the trial's
declared epoch or UTC ISO-8601 strings; both are converted to
scenario-relative seconds.  Positions stay geodetic (lat, lon, alt)
until the geo transform runs.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Optional

import numpy as np

from .errors import DuplicateId, NonMonotonicTime, ParseError
from .model import (
    Detection,
    GroundTruthTrajectory,
    Track,
    TrackSample,
    TrajectorySample,
    TrialBundle,
)

GROUND_TRUTH_FILE = "ground_truth.jsonl"
DETECTIONS_FILE = "detections.jsonl"
TRACKS_FILE = "tracks.jsonl"
TRIAL_FILE = "trial.json"

DEFAULT_EPOCH = "1970-01-01T00:00:00Z"


@dataclass(frozen=True)
class TrialConfig:
    trial_id: str
    dti_id: str
    epoch: str
    sensor_geodetic: tuple[float, float, float]
    aoi: dict
    time_window: tuple[float, float]
    association: dict
    identification: dict

    @classmethod
    def from_dict(cls, raw: dict, path="trial.json") -> "TrialConfig":
        try:
            sensor = raw["sensor"]
            return cls(
                trial_id=raw["trial_id"],
                dti_id=raw["dti_id"],
                epoch=raw.get("epoch", DEFAULT_EPOCH),
                sensor_geodetic=(
                    float(sensor["lat"]),
                    float(sensor["lon"]),
                    float(sensor["alt_m"]),
                ),
                aoi=raw["aoi"],
                time_window=(
                    float(raw["time_window"][0]),
                    float(raw["time_window"][1]),
                ),
                association=raw.get("association", {}),
                identification=raw.get("identification", {}),
            )
        except KeyError as exc:
            raise ParseError(path, 1, exc.args[0], "missing required field") from exc

    def to_dict(self) -> dict:
        lat, lon, alt = self.sensor_geodetic
        return {
            "trial_id": self.trial_id,
            "dti_id": self.dti_id,
            "epoch": self.epoch,
            "sensor": {"lat": lat, "lon": lon, "alt_m": alt},
            "aoi": self.aoi,
            "time_window": list(self.time_window),
            "association": self.association,
            "identification": self.identification,
        }


def _epoch_seconds(epoch: str) -> float:
    return datetime.fromisoformat(epoch.replace("Z", "+00:00")).timestamp()


def _parse_time(value, epoch: str, path, line_no) -> float:
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        try:
            stamp = datetime.fromisoformat(value.replace("Z", "+00:00"))
        except ValueError as exc:
            raise ParseError(path, line_no, "t", f"bad timestamp {value!r}") from exc
        if stamp.tzinfo is None:
            stamp = stamp.replace(tzinfo=timezone.utc)
        return stamp.timestamp() - _epoch_seconds(epoch)
    raise ParseError(path, line_no, "t", f"bad timestamp type {type(value).__name__}")


def _require(record: dict, fields: tuple[str, ...], path, line_no):
    for f in fields:
        if f not in record:
            raise ParseError(path, line_no, f, "missing required field")


def _records(path: Path):
    for line_no, line in enumerate(path.read_text().splitlines(), 1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(path, line_no, "-", f"invalid JSON: {exc}") from exc
        if not isinstance(record, dict):
            raise ParseError(path, line_no, "-", "record is not an object")
        yield line_no, record


def _optional_velocity(record: dict) -> Optional[np.ndarray]:
    if all(k in record for k in ("vx", "vy", "vz")):
        return np.array([record["vx"], record["vy"], record["vz"]], dtype=float)
    return None


def load_ground_truth(path, epoch: str) -> list[GroundTruthTrajectory]:
    path = Path(path)
    rows: dict[str, list[tuple[int, float, dict]]] = {}
    for line_no, rec in _records(path):
        _require(rec, ("object_id", "t", "lat", "lon", "alt_m", "class"), path, line_no)
        t = _parse_time(rec["t"], epoch, path, line_no)
        rows.setdefault(rec["object_id"], []).append((line_no, t, rec))

    out = []
    for oid, items in rows.items():
        times = [t for _, t, _ in items]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise NonMonotonicTime(f"{path}: object {oid!r}: timestamps not increasing")
        samples = []
        for _, t, rec in items:
            samples.append(
                TrajectorySample(
                    t=t,
                    position=np.array(
                        [rec["lat"], rec["lon"], rec["alt_m"]], dtype=float
                    ),
                    velocity=_optional_velocity(rec),
                )
            )
        out.append(
            GroundTruthTrajectory(
                object_id=oid, class_label=items[0][2]["class"], samples=tuple(samples)
            )
        )
    return out


def load_detections(path, epoch: str) -> list[Detection]:
    path = Path(path)
    out = []
    seen = set()
    for line_no, rec in _records(path):
        _require(rec, ("detection_id", "t", "lat", "lon", "alt_m", "sensor_id"), path, line_no)
        if rec["detection_id"] in seen:
            raise DuplicateId(f"{path}: duplicate detection_id {rec['detection_id']!r}")
        seen.add(rec["detection_id"])
        out.append(
            Detection(
                detection_id=rec["detection_id"],
                t=_parse_time(rec["t"], epoch, path, line_no),
                position=np.array([rec["lat"], rec["lon"], rec["alt_m"]], dtype=float),
                sensor_id=rec["sensor_id"],
            )
        )
    out.sort(key=lambda d: (d.t, d.detection_id))
    return out


def load_tracks(path, epoch: str) -> list[Track]:
    path = Path(path)
    rows: dict[str, list[tuple[float, TrackSample]]] = {}
    for line_no, rec in _records(path):
        _require(rec, ("track_id", "t", "lat", "lon", "alt_m"), path, line_no)
        t = _parse_time(rec["t"], epoch, path, line_no)
        sample = TrackSample(
            t=t,
            position=np.array([rec["lat"], rec["lon"], rec["alt_m"]], dtype=float),
            velocity=_optional_velocity(rec),
            ident=rec.get("ident"),
            confidence=rec.get("conf"),
        )
        rows.setdefault(rec["track_id"], []).append((t, sample))

    out = []
    for tid, items in rows.items():
        times = [t for t, _ in items]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise NonMonotonicTime(f"{path}: track {tid!r}: timestamps not increasing")
        out.append(Track(track_id=tid, samples=tuple(s for _, s in items)))
    return out


def load_trial(trial_dir) -> tuple[TrialBundle, TrialConfig]:
    """Load a trial directory into a raw-geodetic bundle."""
    trial_dir = Path(trial_dir)
    config = TrialConfig.from_dict(
        json.loads((trial_dir / TRIAL_FILE).read_text()), trial_dir / TRIAL_FILE
    )
    truths = load_ground_truth(trial_dir / GROUND_TRUTH_FILE, config.epoch)
    detections = load_detections(trial_dir / DETECTIONS_FILE, config.epoch)
    tracks = load_tracks(trial_dir / TRACKS_FILE, config.epoch)
    from .model import SensorPose

    bundle = TrialBundle(
        ground_truths=tuple(truths),
        detections=tuple(detections),
        tracks=tuple(tracks),
        sensor=SensorPose(np.zeros(3)),  # placed after the geo transform
        trial_id=config.trial_id,
        dti_id=config.dti_id,
    )
    return bundle, config


def _dump(record: dict) -> str:
    return json.dumps(record, sort_keys=True)


def write_ground_truth(path, truths: list[GroundTruthTrajectory]):
    lines = []
    for traj in truths:
        for s in traj.samples:
            rec: dict[str, Any] = {
                "object_id": traj.object_id,
                "t": s.t,
                "lat": float(s.position[0]),
                "lon": float(s.position[1]),
                "alt_m": float(s.position[2]),
                "class": traj.class_label,
            }
            if s.velocity is not None:
                rec["vx"], rec["vy"], rec["vz"] = (float(v) for v in s.velocity)
            lines.append(_dump(rec))
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""))


def write_detections(path, detections: list[Detection]):
    lines = [
        _dump(
            {
                "detection_id": d.detection_id,
                "t": d.t,
                "lat": float(d.position[0]),
                "lon": float(d.position[1]),
                "alt_m": float(d.position[2]),
                "sensor_id": d.sensor_id,
            }
        )
        for d in detections
    ]
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""))


def write_tracks(path, tracks: list[Track]):
    lines = []
    for tr in tracks:
        for s in tr.samples:
            rec: dict[str, Any] = {
                "track_id": tr.track_id,
                "t": s.t,
                "lat": float(s.position[0]),
                "lon": float(s.position[1]),
                "alt_m": float(s.position[2]),
            }
            if s.velocity is not None:
                rec["vx"], rec["vy"], rec["vz"] = (float(v) for v in s.velocity)
            if s.ident is not None:
                rec["ident"] = s.ident
            if s.confidence is not None:
                rec["conf"] = s.confidence
            lines.append(_dump(rec))
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""))


def write_trial(trial_dir, bundle: TrialBundle, config: TrialConfig):
    trial_dir = Path(trial_dir)
    trial_dir.mkdir(parents=True, exist_ok=True)
    write_ground_truth(trial_dir / GROUND_TRUTH_FILE, list(bundle.ground_truths))
    write_detections(trial_dir / DETECTIONS_FILE, list(bundle.detections))
    write_tracks(trial_dir / TRACKS_FILE, list(bundle.tracks))
    (trial_dir / TRIAL_FILE).write_text(
        json.dumps(config.to_dict(), sort_keys=True, indent=2) + "\n"
    )
