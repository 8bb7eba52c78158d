import math

import numpy as np
import pytest

from dtieval.errors import EmptyWindow, InvalidCoordinate
from dtieval.geo import (
    AreaOfInterest,
    aoi_presence,
    clip_to_window_and_aoi,
    ecef_to_geodetic,
    enu_to_geodetic,
    geodetic_to_ecef,
    geodetic_to_enu,
)
from dtieval.intervals import Interval
from dtieval.model import (
    Detection,
    GroundTruthTrajectory,
    SensorPose,
    Track,
    TrackSample,
    TrajectorySample,
    TrialBundle,
)

ORIGIN = (52.0, 4.3, 0.0)


class TestTransforms:
    def test_origin_maps_to_zero(self):
        enu = geodetic_to_enu(*ORIGIN, ORIGIN)
        assert np.linalg.norm(enu) < 1e-9

    def test_meridian_arc_northward(self):
        # one millidegree of latitude at the equator is about 110.574 m
        enu = geodetic_to_enu(0.001, 0.0, 0.0, (0.0, 0.0, 0.0))
        assert enu[1] == pytest.approx(110.574, abs=0.1)
        assert abs(enu[0]) < 1e-6

    def test_ecef_round_trip(self):
        lat, lon, alt = 52.123456, 4.654321, 123.45
        lat2, lon2, alt2 = ecef_to_geodetic(geodetic_to_ecef(lat, lon, alt))
        assert lat2 == pytest.approx(lat, abs=1e-9)
        assert lon2 == pytest.approx(lon, abs=1e-9)
        assert alt2 == pytest.approx(alt, abs=1e-6)

    def test_enu_round_trip_within_50km(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            enu = np.array(
                [rng.uniform(-5e4, 5e4), rng.uniform(-5e4, 5e4), rng.uniform(0, 5e3)]
            )
            back = geodetic_to_enu(*enu_to_geodetic(enu, ORIGIN), ORIGIN)
            assert np.linalg.norm(back - enu) < 1e-6

    def test_invalid_coordinates_rejected(self):
        with pytest.raises(InvalidCoordinate):
            geodetic_to_ecef(95.0, 0.0, 0.0)
        with pytest.raises(InvalidCoordinate):
            geodetic_to_ecef(0.0, 181.0, 0.0)
        with pytest.raises(InvalidCoordinate):
            geodetic_to_ecef(0.0, 0.0, math.nan)


def straight_truth(p0, p1, t0, t1, n=101, oid="g0"):
    p0, p1 = np.asarray(p0, float), np.asarray(p1, float)
    samples = [
        TrajectorySample(
            t=t0 + (t1 - t0) * k / (n - 1),
            position=p0 + (p1 - p0) * (k / (n - 1)),
        )
        for k in range(n)
    ]
    return GroundTruthTrajectory(object_id=oid, class_label="uav", samples=samples)


class TestAreaOfInterest:
    def test_circle_contains(self):
        aoi = AreaOfInterest(
            shape="circle", center_en=np.zeros(2), radius_m=100.0,
            alt_min_m=0.0, alt_max_m=200.0,
        )
        assert aoi.contains(np.array([50.0, 50.0, 10.0]))
        assert not aoi.contains(np.array([80.0, 80.0, 10.0]))
        assert not aoi.contains(np.array([0.0, 0.0, 300.0]))
        assert AreaOfInterest(
            shape="circle", center_en=np.zeros(2), radius_m=100.0,
            alt_min_m=0.0, alt_max_m=200.0, ignore_altitude=True,
        ).contains(np.array([0.0, 0.0, 300.0]))

    def test_polygon_contains(self):
        aoi = AreaOfInterest(
            shape="polygon",
            vertices_en=np.array([[0, 0], [100, 0], [100, 100], [0, 100]]),
            alt_min_m=0.0, alt_max_m=500.0,
        )
        assert aoi.contains(np.array([50.0, 50.0, 10.0]))
        assert aoi.contains(np.array([0.0, 0.0, 10.0]))  # boundary counts
        assert not aoi.contains(np.array([150.0, 50.0, 10.0]))

    def test_bad_shapes_rejected(self):
        with pytest.raises(ValueError):
            AreaOfInterest(shape="circle", center_en=np.zeros(2), radius_m=0.0,
                           alt_min_m=0.0, alt_max_m=1.0)
        with pytest.raises(ValueError):
            AreaOfInterest(shape="blob", alt_min_m=0.0, alt_max_m=1.0)
        with pytest.raises(ValueError):
            # self-intersecting bowtie
            AreaOfInterest(
                shape="polygon",
                vertices_en=np.array([[0, 0], [1, 1], [1, 0], [0, 1]]),
                alt_min_m=0.0, alt_max_m=1.0,
            )


class TestAoiPresence:
    def test_chord_crossing_matches_closed_form(self):
        # straight flight through a circle of radius 100: entry/exit times
        # follow from the chord geometry
        aoi = AreaOfInterest(
            shape="circle", center_en=np.zeros(2), radius_m=100.0,
            alt_min_m=0.0, alt_max_m=500.0,
        )
        traj = straight_truth([-200, 30, 50], [200, 30, 50], 0.0, 40.0)
        presence = aoi_presence(traj, Interval(0.0, 40.0), aoi)
        half_chord = math.sqrt(100.0**2 - 30.0**2)
        speed = 10.0  # 400 m in 40 s
        t_in = (200.0 - half_chord) / speed
        t_out = (200.0 + half_chord) / speed
        assert len(presence.intervals) == 1
        assert presence.start == pytest.approx(t_in, abs=2e-3)
        assert presence.end == pytest.approx(t_out, abs=2e-3)

    def test_always_inside_and_never_inside(self):
        aoi = AreaOfInterest(
            shape="circle", center_en=np.zeros(2), radius_m=1000.0,
            alt_min_m=0.0, alt_max_m=500.0,
        )
        inside = straight_truth([0, 0, 50], [100, 0, 50], 0.0, 10.0)
        assert aoi_presence(inside, Interval(0.0, 10.0), aoi).to_pairs() == [(0.0, 10.0)]
        outside = straight_truth([5000, 0, 50], [6000, 0, 50], 0.0, 10.0)
        assert not aoi_presence(outside, Interval(0.0, 10.0), aoi)

    def test_window_clips_presence(self):
        aoi = AreaOfInterest(
            shape="circle", center_en=np.zeros(2), radius_m=1000.0,
            alt_min_m=0.0, alt_max_m=500.0,
        )
        traj = straight_truth([0, 0, 50], [100, 0, 50], 0.0, 10.0)
        assert aoi_presence(traj, Interval(2.0, 8.0), aoi).to_pairs() == [(2.0, 8.0)]


def small_bundle():
    truth_in = straight_truth([0, 0, 50], [100, 0, 50], 0.0, 10.0, oid="in")
    truth_out = straight_truth([9000, 0, 50], [9100, 0, 50], 0.0, 10.0, oid="out")
    det = Detection("d1", 5.0, np.array([50.0, 0.0, 50.0]), "s1")
    det_late = Detection("d2", 50.0, np.array([50.0, 0.0, 50.0]), "s1")
    trk = Track("t1", (
        TrackSample(t=2.0, position=np.array([20.0, 0.0, 50.0])),
        TrackSample(t=30.0, position=np.array([20.0, 0.0, 50.0])),
    ))
    return TrialBundle(
        ground_truths=(truth_in, truth_out),
        detections=(det, det_late),
        tracks=(trk,),
        sensor=SensorPose(np.zeros(3)),
    )


class TestClip:
    AOI = AreaOfInterest(
        shape="circle", center_en=np.zeros(2), radius_m=1000.0,
        alt_min_m=0.0, alt_max_m=500.0,
    )

    def test_drops_truths_outside_aoi(self):
        clip = clip_to_window_and_aoi(small_bundle(), Interval(0.0, 10.0), self.AOI)
        assert clip.dropped_truths == ("out",)
        assert [g.object_id for g in clip.bundle.ground_truths] == ["in"]

    def test_window_filters_detections_and_track_samples(self):
        clip = clip_to_window_and_aoi(small_bundle(), Interval(0.0, 10.0), self.AOI)
        assert [d.detection_id for d in clip.bundle.detections] == ["d1"]
        assert len(clip.bundle.tracks[0].samples) == 1

    def test_empty_window_rejected(self):
        with pytest.raises(EmptyWindow):
            clip_to_window_and_aoi(small_bundle(), Interval(5.0, 5.0), self.AOI)
