"""Analytic detection channel: projects simulated bodies into cameras and
turns ground-truth boxes into weather-conditioned noisy detections.

The weather presets below are calibration values, not measured data; every
parameter can be overridden from scenario config files.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .boxes import Box
from .camera import project_boxes

CLASS_PEDESTRIAN = 1
CLASS_CAR = 3

VISIBILITY_LATTICE_PX = 4.0
OCCLUSION_MISS_WEIGHT = 0.5


@dataclass(frozen=True)
class WeatherModel:
    name: str
    base_miss: float      # unconditional per-box miss probability
    jitter_std: float     # px, applied to box center and size
    fp_rate: float        # expected false positives per frame (Poisson)
    fog_beta: float       # m; distance attenuation scale, inf = no attenuation

    def __post_init__(self):
        if not (0.0 <= self.base_miss <= 1.0):
            raise ValueError("base_miss must be in [0, 1]")
        if self.jitter_std < 0 or self.fp_rate < 0:
            raise ValueError("jitter_std and fp_rate must be >= 0")


# Calibrated channel presets.  Snow is hardest (highest miss/jitter/clutter),
# sun near-clean; fog adds a depth-dependent miss term on top of a mid base.
# Jitter values sit well below the trackers' association gates for the box
# sizes the built-in scenes produce.
WEATHER_PRESETS = {
    "sun": WeatherModel("sun", base_miss=0.002, jitter_std=0.3, fp_rate=0.01, fog_beta=math.inf),
    "rain": WeatherModel("rain", base_miss=0.07, jitter_std=0.5, fp_rate=0.05, fog_beta=math.inf),
    "fog": WeatherModel("fog", base_miss=0.03, jitter_std=0.4, fp_rate=0.03, fog_beta=1500.0),
    "snow": WeatherModel("snow", base_miss=0.10, jitter_std=0.8, fp_rate=0.10, fog_beta=math.inf),
}


def get_weather(name, **overrides):
    if name not in WEATHER_PRESETS:
        raise ValueError(f"unknown weather {name!r} (presets: {', '.join(WEATHER_PRESETS)})")
    preset = WEATHER_PRESETS[name]
    return replace(preset, **overrides) if overrides else preset


@dataclass
class GtEntry:
    frame: int
    object_id: int
    box: Box
    cls: int
    visibility: float = 1.0
    depth: float = 0.0  # camera-frame z of the body center; not serialized


@dataclass
class Detection:
    frame: int
    box: Box
    conf: float


def agent_world_box(agent):
    """Vertical body box: footprint 2r x 2r, the agent's height, z up."""
    x, y = agent.position
    r = agent.radius
    return (x - r, y - r, 0.0), (x + r, y + r, agent.height)


def capture_frame(camera, agents, car_boxes=(), frame_no=1, min_area=0.0):
    """Project all bodies into one camera; returns visibility-filled entries.

    car_boxes: (object_id, lo, hi) triplets from traffic.car_world_boxes.
    Entries whose clipped box area falls below min_area are dropped.
    """
    if frame_no < 1:
        raise ValueError("frame numbers are 1-based")
    ids, clses, los, his = [], [], [], []
    for agent in agents:
        lo, hi = agent_world_box(agent)
        ids.append(agent.id)
        clses.append(CLASS_PEDESTRIAN)
        los.append(lo)
        his.append(hi)
    for oid, lo, hi in car_boxes:
        ids.append(oid)
        clses.append(CLASS_CAR)
        los.append(lo)
        his.append(hi)
    boxes, depths = project_boxes(camera, los, his) if ids else ([], [])
    entries = []
    for i, box in enumerate(boxes):
        if box is None:
            continue
        if min_area > 0.0 and box.area < min_area:
            continue
        entries.append(GtEntry(frame=frame_no, object_id=ids[i], box=box,
                               cls=clses[i], depth=float(depths[i])))
    compute_visibility(entries)
    return entries


def compute_visibility(entries):
    """Fill each entry's visibility: the box fraction not covered by boxes of
    strictly smaller depth, estimated on a <=4 px sampling lattice."""
    n = len(entries)
    for i, e in enumerate(entries):
        occluders = [o.box for o in entries if o.depth < e.depth]
        if not occluders:
            e.visibility = 1.0
            continue
        nx = max(1, math.ceil(e.box.width / VISIBILITY_LATTICE_PX))
        ny = max(1, math.ceil(e.box.height / VISIBILITY_LATTICE_PX))
        xs = e.box.left + (np.arange(nx) + 0.5) * (e.box.width / nx)
        ys = e.box.top + (np.arange(ny) + 0.5) * (e.box.height / ny)
        covered = np.zeros((ny, nx), dtype=bool)
        for o in occluders:
            if o.right <= e.box.left or o.left >= e.box.right \
                    or o.bottom <= e.box.top or o.top >= e.box.bottom:
                continue
            covered |= ((xs >= o.left) & (xs < o.right))[None, :] \
                & ((ys >= o.top) & (ys < o.bottom))[:, None]
        e.visibility = 1.0 - float(covered.mean())
    return entries


def miss_probability(entry, weather):
    """Closed-form per-entry miss probability of the detection channel."""
    if math.isinf(weather.fog_beta):
        fog = 0.0
    else:
        fog = 1.0 - math.exp(-entry.depth / weather.fog_beta)
    p = weather.base_miss + fog + OCCLUSION_MISS_WEIGHT * (1.0 - entry.visibility)
    return min(1.0, p)


def synthesize_detections(gt_frame, weather, rng, frame=None, image_size=(800, 600)):
    """Noise channel: drop, jitter, clutter.  Detections carry no ids.

    True detections get confidence 1.0; injected false positives 0.3.
    """
    if frame is None:
        if not gt_frame:
            raise ValueError("frame number required when the gt frame is empty")
        frame = gt_frame[0].frame
    dets = []
    for e in gt_frame:
        if rng.random() < miss_probability(e, weather):
            continue
        if weather.jitter_std > 0.0:
            dcx, dcy, dw, dh = rng.normal(0.0, weather.jitter_std, 4)
            w = max(1.0, e.box.width + dw)
            h = max(1.0, e.box.height + dh)
            cx = e.box.left + e.box.width / 2 + dcx
            cy = e.box.top + e.box.height / 2 + dcy
            box = Box(cx - w / 2, cy - h / 2, w, h)
        else:
            box = e.box
        dets.append(Detection(frame=frame, box=box, conf=1.0))
    width, height = image_size
    for _ in range(int(rng.poisson(weather.fp_rate))):
        w = rng.uniform(10.0, 60.0)
        h = rng.uniform(20.0, 120.0)
        cx = rng.uniform(0.0, width)
        cy = rng.uniform(0.0, height)
        dets.append(Detection(frame=frame, box=Box(cx - w / 2, cy - h / 2, w, h), conf=0.3))
    return dets


def perturb_detections(dets, drop_prob, dup_prob, rng):
    """Independently drop detections and duplicate survivors with 1 px jitter."""
    if not (0.0 <= drop_prob <= 1.0 and 0.0 <= dup_prob <= 1.0):
        raise ValueError("probabilities must be in [0, 1]")
    out = []
    for det in dets:
        if drop_prob > 0.0 and rng.random() < drop_prob:
            continue
        out.append(det)
        if dup_prob > 0.0 and rng.random() < dup_prob:
            dx, dy = rng.normal(0.0, 1.0, 2)
            b = det.box
            out.append(Detection(frame=det.frame,
                                 box=Box(b.left + dx, b.top + dy, b.width, b.height),
                                 conf=det.conf))
    return out
