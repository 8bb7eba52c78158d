import numpy as np
import pytest

from dtieval.errors import OutOfRange
from dtieval.intervals import IntervalSet
from dtieval.model import (
    GroundTruthTrajectory,
    Track,
    TrackSample,
    TrajectorySample,
    TrialBundle,
    Detection,
    SensorPose,
    distance,
)


def traj(points, oid="g0", cls="uav", velocities=None):
    samples = []
    for k, (t, p) in enumerate(points):
        v = velocities[k] if velocities else None
        samples.append(TrajectorySample(t=t, position=np.asarray(p, float), velocity=v))
    return GroundTruthTrajectory(object_id=oid, class_label=cls, samples=samples)


class TestTrajectory:
    def test_position_interpolation(self):
        g = traj([(0.0, [0, 0, 0]), (10.0, [100, 0, 0])])
        pos, _ = g.sample_at(2.5)
        assert pos == pytest.approx([25, 0, 0])

    def test_exact_at_sample_points(self):
        g = traj([(0.0, [0, 0, 0]), (1.0, [3, 4, 5]), (2.0, [6, 8, 10])])
        pos, _ = g.sample_at(1.0)
        assert pos is g.samples[1].position

    def test_out_of_range(self):
        g = traj([(0.0, [0, 0, 0]), (1.0, [1, 0, 0])])
        with pytest.raises(OutOfRange):
            g.sample_at(-0.1)
        with pytest.raises(OutOfRange):
            g.sample_at(1.1)

    def test_stored_velocity_interpolates(self):
        g = traj(
            [(0.0, [0, 0, 0]), (1.0, [1, 0, 0])],
            velocities=[np.array([1.0, 0, 0]), np.array([3.0, 0, 0])],
        )
        _, vel = g.sample_at(0.5)
        assert vel == pytest.approx([2.0, 0, 0])

    def test_finite_difference_velocity(self):
        g = traj([(0.0, [0, 0, 0]), (1.0, [10, 0, 0]), (2.0, [30, 0, 0])])
        _, v_mid = g.sample_at(0.5)
        assert v_mid == pytest.approx([10, 0, 0])
        # interior sample point uses the central difference of leg slopes
        _, v_knot = g.sample_at(1.0)
        assert v_knot == pytest.approx([15, 0, 0])

    def test_validation(self):
        with pytest.raises(ValueError):
            traj([(0.0, [0, 0, 0])])
        with pytest.raises(ValueError):
            traj([(0.0, [0, 0, 0]), (0.0, [1, 0, 0])])
        with pytest.raises(ValueError):
            traj([(0.0, [0, 0, 0]), (1.0, [1, 0, 0])], cls="plane")

    def test_default_presence_is_full_span(self):
        g = traj([(2.0, [0, 0, 0]), (8.0, [1, 0, 0])])
        assert g.aoi_presence.to_pairs() == [(2.0, 8.0)]

    def test_with_presence(self):
        g = traj([(0.0, [0, 0, 0]), (10.0, [1, 0, 0])])
        g2 = g.with_presence(IntervalSet.from_pairs([(1, 2)]))
        assert g2.aoi_presence.to_pairs() == [(1, 2)]


class TestTrack:
    def test_velocity_fallback(self):
        tr = Track("t", (
            TrackSample(t=0.0, position=np.array([0.0, 0, 0])),
            TrackSample(t=1.0, position=np.array([10.0, 0, 0])),
            TrackSample(t=2.0, position=np.array([30.0, 0, 0])),
        ))
        assert tr.velocity_at_index(0) == pytest.approx([10, 0, 0])
        assert tr.velocity_at_index(1) == pytest.approx([15, 0, 0])  # central
        assert tr.velocity_at_index(2) == pytest.approx([20, 0, 0])

    def test_reported_velocity_wins(self):
        tr = Track("t", (
            TrackSample(t=0.0, position=np.zeros(3), velocity=np.array([5.0, 0, 0])),
            TrackSample(t=1.0, position=np.array([10.0, 0, 0])),
        ))
        assert tr.velocity_at_index(0) == pytest.approx([5, 0, 0])

    def test_single_sample_track(self):
        tr = Track("t", (TrackSample(t=0.0, position=np.zeros(3)),))
        assert tr.velocity_at_index(0) is None
        assert not tr.time_range()

    def test_non_monotonic_rejected(self):
        with pytest.raises(ValueError):
            Track("t", (
                TrackSample(t=1.0, position=np.zeros(3)),
                TrackSample(t=0.5, position=np.zeros(3)),
            ))


class TestBundle:
    def test_duplicate_ids_rejected(self):
        g = traj([(0.0, [0, 0, 0]), (1.0, [1, 0, 0])])
        with pytest.raises(ValueError):
            TrialBundle(
                ground_truths=(g, g), detections=(), tracks=(),
                sensor=SensorPose(np.zeros(3)),
            )

    def test_non_finite_detection_rejected(self):
        with pytest.raises(ValueError):
            Detection("d", 0.0, np.array([np.nan, 0, 0]), "s")


def test_distance_modes():
    p, q = np.array([3.0, 4.0, 12.0]), np.zeros(3)
    assert distance(p, q, "2d") == pytest.approx(5.0)
    assert distance(p, q, "3d") == pytest.approx(13.0)
