"""Python access to the proid left-ventricle segmentation core.

Dictionaries cross the native boundary as JSON, so every helper here takes
and returns plain Python structures plus numpy arrays.
"""

import json

import numpy as np

from . import _core
from ._core import ProidError, ejection_fraction, polar_angle

__all__ = [
    "ProidError",
    "apply_ace",
    "contour_volume",
    "default_params",
    "ejection_fraction",
    "generate_phantom",
    "median_filter",
    "phantom_params",
    "polar_angle",
    "polygon_dice",
    "segment",
]


def _dumps(obj):
    return "" if obj is None else json.dumps(obj)


def default_params():
    return json.loads(_core.default_params())


def phantom_params():
    """Defaults tuned for the small synthetic phantom frames."""
    return json.loads(_core.phantom_params())


def median_filter(frame, kernel=11):
    return _core.median_filter(np.asarray(frame, dtype=np.float32), kernel)


def apply_ace(frame, uips):
    return _core.apply_ace(np.asarray(frame, dtype=np.float32), json.dumps(uips))


def contour_volume(polygon, mv_a, mv_b, pixel_spacing_mm):
    return _core.contour_volume(np.asarray(polygon, dtype=float), tuple(mv_a), tuple(mv_b),
                                pixel_spacing_mm)


def polygon_dice(a, b, width, height):
    return _core.polygon_dice(np.asarray(a, dtype=float), np.asarray(b, dtype=float), width, height)


def segment(frames, uips, pixel_spacing_mm=1.0, frame_interval_s=1.0 / 30.0, params=None):
    """Segment a (T, H, W) sequence from frame-0 UIPs.

    `uips` is {"apex": [x, y], "mv_left": [x, y], "mv_right": [x, y]} and
    `params` an optional partial override of default_params().
    """
    out = _core.segment(np.asarray(frames, dtype=np.float32), pixel_spacing_mm, frame_interval_s,
                        json.dumps(uips), _dumps(params))
    return json.loads(out)


def generate_phantom(spec=None):
    """Returns (frames, truth) where truth holds contours, volumes and UIPs."""
    frames, truth = _core.generate_phantom(_dumps(spec))
    return frames, json.loads(truth)
