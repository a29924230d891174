import math

import numpy as np
import pytest

import proid


@pytest.fixture(scope="module")
def phantom():
    spec = {"volume_amplitude": 3.0 / 7.0, "frames": 10, "period_frames": 10}
    return proid.generate_phantom(spec)


def test_phantom_shape_and_truth(phantom):
    frames, truth = phantom
    assert frames.shape == (10, 320, 240)
    assert frames.dtype == np.float32
    assert abs(truth["measured_cnr"] - 5.0) <= 0.2
    assert len(truth["frames"]) == 10
    assert set(truth["uips"]) == {"apex", "mv_left", "mv_right"}


def test_segment_recovers_ejection_fraction(phantom):
    frames, truth = phantom
    result = proid.segment(frames, truth["uips"], truth["pixel_spacing_mm"],
                           params=proid.phantom_params())
    assert len(result["boundaries"]) == 10
    beats = result["metrics"]["beats"]
    assert len(beats) == 1
    volumes = [f["volume_ml"] for f in truth["frames"]]
    true_ef = 100.0 * (max(volumes) - min(volumes)) / max(volumes)
    assert abs(beats[0]["ef_percent"] - true_ef) <= 5.0


def test_collinear_uips_raise(phantom):
    frames, _ = phantom
    uips = {"apex": [10, 10], "mv_left": [20, 20], "mv_right": [30, 30]}
    with pytest.raises(proid.ProidError, match="invalid-uip"):
        proid.segment(frames[:2], uips)


def test_contour_volume_of_a_sphere():
    r = 40.0
    t = math.pi / 2 + 2 * math.pi * (np.arange(720) + 0.5) / 720
    poly = np.column_stack([100 + r * np.cos(t), 100 + r * np.sin(t)])
    v = proid.contour_volume(poly, poly[0], poly[-1], 0.5)
    assert v == pytest.approx(4.0 / 3.0 * math.pi * 20.0**3 / 1000.0, rel=0.01)


def test_median_filter_removes_an_isolated_pixel():
    frame = np.full((21, 21), 50.0, dtype=np.float32)
    frame[10, 10] = 255.0
    out = proid.median_filter(frame, 3)
    assert out.shape == frame.shape
    assert np.all(out == 50.0)


def test_polar_angle_and_ef():
    assert proid.polar_angle(4, 3) == pytest.approx(53.13, abs=0.01)
    assert proid.polar_angle(1, 0) == pytest.approx(90.0)
    assert proid.ejection_fraction(100.0, 50.0) == pytest.approx(50.0)
