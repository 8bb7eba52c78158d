"""Normalization, weighting and aggregation of metric values, plus the
append-only rating store.

Each raw metric is mapped linearly onto [0, 1] between user-supplied
worst/best anchors (1 is best).  Component scores are weighted means of
the present metric scores with weights renormalized over present
metrics; the system score is the weighted mean of present components.
Default anchors ship for every metric and are fully overridable.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .errors import AllZeroWeights, MissingContext, NegativeWeight, StoreCorrupt

COMPONENTS = ("detection", "tracking", "identification")

# metric -> (component, orientation, worst anchor, best anchor)
DEFAULT_CONTEXTS: dict[str, tuple[str, str, float, float]] = {
    "location_accuracy_2d": ("detection", "lower_better", 100.0, 0.0),
    "location_accuracy_3d": ("detection", "lower_better", 100.0, 0.0),
    "range_ratio_near": ("detection", "higher_better", 0.0, 1.0),
    "range_ratio_far": ("detection", "higher_better", 0.0, 1.0),
    "detection_precision": ("detection", "higher_better", 0.0, 1.0),
    "detection_immediateness": ("detection", "lower_better", 60.0, 0.0),
    "track_completeness": ("tracking", "higher_better", 0.0, 1.0),
    "track_continuity": ("tracking", "lower_better", 20.0, 0.0),
    "track_ambiguity": ("tracking", "lower_better", 5.0, 1.0),
    "track_spuriousness": ("tracking", "lower_better", 1.0, 0.0),
    "track_positional_accuracy": ("tracking", "lower_better", 50.0, 0.0),
    "track_velocity_accuracy": ("tracking", "lower_better", 20.0, 0.0),
    "longest_track_segment": ("tracking", "higher_better", 0.0, 1.0),
    "tracking_immediateness": ("tracking", "lower_better", 60.0, 0.0),
    "f1": ("identification", "higher_better", 0.0, 1.0),
    "identification_precision": ("identification", "higher_better", 0.0, 1.0),
    "pod": ("identification", "higher_better", 0.0, 1.0),
    "mar": ("identification", "lower_better", 1.0, 0.0),
    "far": ("identification", "lower_better", 1.0, 0.0),
}


@dataclass(frozen=True)
class ContextEntry:
    orientation: str
    worst: float
    best: float
    clamp: bool = True

    def __post_init__(self):
        if self.worst == self.best:
            raise ValueError("context anchors must differ")
        if self.orientation not in ("higher_better", "lower_better"):
            raise ValueError(f"bad orientation {self.orientation!r}")


@dataclass(frozen=True)
class ScoringContext:
    entries: dict[str, ContextEntry]

    @classmethod
    def default(cls) -> "ScoringContext":
        return cls(
            {
                name: ContextEntry(orientation, worst, best)
                for name, (_, orientation, worst, best) in DEFAULT_CONTEXTS.items()
            }
        )

    @classmethod
    def from_file(cls, path) -> "ScoringContext":
        """Defaults overlaid with the entries of a scoring_context.json."""
        raw = json.loads(Path(path).read_text())
        entries = dict(cls.default().entries)
        for name, spec in raw.get("metrics", {}).items():
            entries[name] = ContextEntry(
                orientation=spec["orientation"],
                worst=float(spec["worst"]),
                best=float(spec["best"]),
                clamp=bool(spec.get("clamp", True)),
            )
        return cls(entries)


def normalize_metric(raw: float, entry: ContextEntry) -> float:
    score = (raw - entry.worst) / (entry.best - entry.worst)
    if entry.clamp:
        score = min(1.0, max(0.0, score))
    return score


def component_of(metric: str) -> str:
    if metric not in DEFAULT_CONTEXTS:
        raise MissingContext(f"unknown metric {metric!r}")
    return DEFAULT_CONTEXTS[metric][0]


@dataclass(frozen=True)
class WeightConfig:
    metric_weights: dict[str, dict[str, float]]  # component -> metric -> w
    component_weights: dict[str, float]

    def __post_init__(self):
        for comp, weights in list(self.metric_weights.items()) + [
            ("__components__", self.component_weights)
        ]:
            for name, w in weights.items():
                if w < 0:
                    raise NegativeWeight(f"{comp}/{name}: {w}")
            if weights and sum(weights.values()) <= 0:
                raise AllZeroWeights(f"all weights zero at level {comp!r}")

    @classmethod
    def default(cls) -> "WeightConfig":
        metric_weights: dict[str, dict[str, float]] = {c: {} for c in COMPONENTS}
        for name, (comp, *_rest) in DEFAULT_CONTEXTS.items():
            metric_weights[comp][name] = 1.0
        return cls(metric_weights, {c: 1.0 for c in COMPONENTS})

    def normalized_metric_weights(self, comp: str) -> dict[str, float]:
        weights = self.metric_weights.get(comp, {})
        total = sum(weights.values())
        return {k: v / total for k, v in weights.items()} if total > 0 else {}


def load_weights(path) -> WeightConfig:
    raw = json.loads(Path(path).read_text())
    default = WeightConfig.default()
    metric_weights = {
        comp: dict(default.metric_weights[comp]) for comp in COMPONENTS
    }
    for comp, weights in raw.get("metric_weights", {}).items():
        metric_weights.setdefault(comp, {}).update(
            {k: float(v) for k, v in weights.items()}
        )
    component_weights = dict(default.component_weights)
    component_weights.update(
        {k: float(v) for k, v in raw.get("component_weights", {}).items()}
    )
    return WeightConfig(metric_weights, component_weights)


@dataclass(frozen=True)
class ScoreTree:
    metric_scores: dict[str, float]
    component_scores: dict[str, float]
    system_score: Optional[float]
    missing: dict[str, str] = field(default_factory=dict)
    raw_values: dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "metric_scores": self.metric_scores,
            "component_scores": self.component_scores,
            "system_score": self.system_score,
            "missing": self.missing,
            "raw_values": self.raw_values,
        }


def normalize_all(
    raw_metrics: dict[str, Optional[float]], context: ScoringContext
) -> tuple[dict[str, float], dict[str, str]]:
    scores: dict[str, float] = {}
    missing: dict[str, str] = {}
    for name, raw in raw_metrics.items():
        if name not in context.entries:
            raise MissingContext(f"no scoring context for metric {name!r}")
        if raw is None:
            missing[name] = "undefined"
        else:
            scores[name] = normalize_metric(raw, context.entries[name])
    return scores, missing


def aggregate(
    metric_scores: dict[str, float],
    weights: WeightConfig,
    missing: Optional[dict[str, str]] = None,
    raw_values: Optional[dict[str, float]] = None,
    treat_missing_as_zero: bool = False,
) -> ScoreTree:
    """Weighted means with weights renormalized over present metrics.

    Missing metrics are dropped from the aggregation (never imputed as
    zero) unless treat_missing_as_zero is set.
    """
    missing = dict(missing or {})
    scores = dict(metric_scores)
    if treat_missing_as_zero:
        for name in list(missing):
            scores[name] = 0.0
        missing = {}

    component_scores: dict[str, float] = {}
    for comp in COMPONENTS:
        w = weights.metric_weights.get(comp, {})
        present = {
            m: s for m, s in scores.items() if component_of(m) == comp and w.get(m, 0) > 0
        }
        total = sum(w[m] for m in present)
        if total <= 0:
            missing[f"component:{comp}"] = "no present metrics"
            continue
        component_scores[comp] = sum(w[m] * s for m, s in present.items()) / total

    cw = weights.component_weights
    present_c = {c: s for c, s in component_scores.items() if cw.get(c, 0) > 0}
    total_c = sum(cw[c] for c in present_c)
    system = (
        sum(cw[c] * s for c, s in present_c.items()) / total_c if total_c > 0 else None
    )
    return ScoreTree(
        metric_scores=scores,
        component_scores=component_scores,
        system_score=system,
        missing=missing,
        raw_values=dict(raw_values or {}),
    )


@dataclass(frozen=True)
class RatingRow:
    dti_id: str
    trials: int
    mean_system_score: float
    mean_component_scores: dict[str, float]


def update_rating(store_path, dti_id: str, tree: ScoreTree, trial_id: str = "") -> list[RatingRow]:
    """Append one record for this evaluation, return the refreshed table.

    The store is an append-only JSONL file; rows are ordered by mean
    system score descending, ties by dti_id.
    """
    path = Path(store_path)
    record = {
        "dti_id": dti_id,
        "trial_id": trial_id,
        "system_score": tree.system_score,
        "component_scores": tree.component_scores,
    }
    with path.open("a") as fh:
        fh.write(json.dumps(record, sort_keys=True) + "\n")
    return rating_table(path)


def rating_table(store_path) -> list[RatingRow]:
    path = Path(store_path)
    records = []
    for line_no, line in enumerate(path.read_text().splitlines(), 1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
            rec["dti_id"], rec["system_score"]
        except (json.JSONDecodeError, KeyError) as exc:
            raise StoreCorrupt(f"{path}:{line_no}: {exc}") from exc
        records.append(rec)

    by_dti: dict[str, list[dict]] = {}
    for rec in records:
        by_dti.setdefault(rec["dti_id"], []).append(rec)
    rows = []
    for dti, recs in by_dti.items():
        sys_scores = [r["system_score"] for r in recs if r["system_score"] is not None]
        comp_means: dict[str, float] = {}
        for comp in COMPONENTS:
            vals = [
                r["component_scores"][comp]
                for r in recs
                if comp in r.get("component_scores", {})
            ]
            if vals:
                comp_means[comp] = sum(vals) / len(vals)
        rows.append(
            RatingRow(
                dti_id=dti,
                trials=len(recs),
                mean_system_score=(sum(sys_scores) / len(sys_scores)) if sys_scores else 0.0,
                mean_component_scores=comp_means,
            )
        )
    rows.sort(key=lambda r: (-r.mean_system_score, r.dti_id))
    return rows
