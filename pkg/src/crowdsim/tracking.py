"""Tracking by detection: the IOU tracker and a SORT-style tracker
(constant-velocity Kalman filter + Hungarian IOU association).

Both trackers are pure functions of (detections, params): no randomness,
fixed tie-breaks, deterministic output ids.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from .boxes import Box, iou  # re-exported: iou is part of this module's API

__all__ = [
    "iou", "solve_assignment", "IouTrackerParams", "SortParams", "Track",
    "track_iou", "track_sort", "KalmanBoxState", "kalman_init", "kalman_step",
    "group_detections_by_frame",
]


def solve_assignment(cost):
    """Minimum-cost one-to-one assignment covering min(n, m) pairs.

    Returns (row, col) pairs sorted by row.  Backed by scipy's Hungarian
    implementation; costs must be finite.
    """
    cost = np.atleast_2d(np.asarray(cost, dtype=float))
    if cost.size == 0:
        return []
    if not np.isfinite(cost).all():
        raise ValueError("assignment costs must be finite")
    rows, cols = linear_sum_assignment(cost)
    return sorted(zip(rows.tolist(), cols.tolist()))


def iou_matrix(boxes_a, boxes_b):
    """Pairwise IOU of two box lists as an (n, m) array."""
    n, m = len(boxes_a), len(boxes_b)
    if n == 0 or m == 0:
        return np.zeros((n, m))
    a = np.asarray([(b.left, b.top, b.width, b.height) for b in boxes_a])
    b = np.asarray([(x.left, x.top, x.width, x.height) for x in boxes_b])
    ix = np.minimum(a[:, None, 0] + a[:, None, 2], b[None, :, 0] + b[None, :, 2]) \
        - np.maximum(a[:, None, 0], b[None, :, 0])
    iy = np.minimum(a[:, None, 1] + a[:, None, 3], b[None, :, 1] + b[None, :, 3]) \
        - np.maximum(a[:, None, 1], b[None, :, 1])
    inter = np.clip(ix, 0.0, None) * np.clip(iy, 0.0, None)
    union = (a[:, 2] * a[:, 3])[:, None] + (b[:, 2] * b[:, 3])[None, :] - inter
    return np.where(inter > 0.0, inter / np.where(union > 0.0, union, 1.0), 0.0)


@dataclass(frozen=True)
class IouTrackerParams:
    sigma_l: float = 0.0    # minimum detection confidence
    sigma_h: float = 0.5    # minimum best confidence per kept track
    sigma_iou: float = 0.5  # association threshold
    t_min: int = 2          # minimum kept track length

    def __post_init__(self):
        for name in ("sigma_l", "sigma_h", "sigma_iou"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0):
                raise ValueError(f"{name} must be in [0, 1]")
        if self.t_min < 1:
            raise ValueError("t_min must be >= 1")


@dataclass(frozen=True)
class SortParams:
    iou_threshold: float = 0.3
    max_age: int = 3        # consecutive misses a track survives
    min_hits: int = 3       # consecutive hits before boxes are emitted

    def __post_init__(self):
        if not (0.0 <= self.iou_threshold <= 1.0):
            raise ValueError("iou_threshold must be in [0, 1]")
        if self.max_age < 0 or self.min_hits < 1:
            raise ValueError("max_age must be >= 0 and min_hits >= 1")


@dataclass
class Track:
    hyp_id: int
    boxes: list            # (frame, Box) with strictly increasing frames
    max_conf: float = 1.0


def group_detections_by_frame(dets):
    """Map frame -> detections (input order preserved within a frame)."""
    by_frame = {}
    for det in dets:
        by_frame.setdefault(det.frame, []).append(det)
    return by_frame


def _frame_range(dets_by_frame, n_frames=None):
    if n_frames is None:
        n_frames = max(dets_by_frame, default=0)
    return range(1, n_frames + 1)


def track_iou(dets_by_frame, params=None, n_frames=None):
    """The IOU tracker: greedy frame-to-frame association, no motion model.

    Per frame, each active track (in creation order) takes the remaining
    detection with the highest IOU to its last box when that IOU reaches
    sigma_iou; ties go to the lower detection index.  Unmatched tracks finish
    immediately (no re-identification).  Finished tracks are kept when their
    best confidence reaches sigma_h and they span at least t_min frames.
    """
    if params is None:
        params = IouTrackerParams()
    active = []   # dicts: boxes, max_conf
    finished = []

    def finish(track):
        if track["max_conf"] >= params.sigma_h and len(track["boxes"]) >= params.t_min:
            finished.append(track)

    for frame in _frame_range(dets_by_frame, n_frames):
        dets = [d for d in dets_by_frame.get(frame, []) if d.conf >= params.sigma_l]
        survivors = []
        matrix = iou_matrix([t["boxes"][-1][1] for t in active],
                            [d.box for d in dets])
        taken = np.zeros(len(dets), dtype=bool)
        for row, track in enumerate(active):
            best_idx = -1
            if len(dets):
                ious = np.where(taken, -1.0, matrix[row])
                best_idx = int(np.argmax(ious))  # ties -> lowest det index
                if ious[best_idx] < params.sigma_iou or ious[best_idx] <= 0.0:
                    best_idx = -1
            if best_idx >= 0:
                taken[best_idx] = True
                track["boxes"].append((frame, dets[best_idx].box))
                track["max_conf"] = max(track["max_conf"], dets[best_idx].conf)
                survivors.append(track)
            else:
                finish(track)
        for idx in range(len(dets)):
            if not taken[idx]:
                survivors.append({"boxes": [(frame, dets[idx].box)],
                                  "max_conf": dets[idx].conf})
        active = survivors

    for track in active:
        finish(track)

    finished.sort(key=lambda t: t["boxes"][0][0])
    return [Track(hyp_id=i + 1, boxes=t["boxes"], max_conf=t["max_conf"])
            for i, t in enumerate(finished)]


# --- SORT ---------------------------------------------------------------

# state: [u, v, s, r, du, dv, ds] -- box center, area, aspect ratio (constant)
_F = np.eye(7)
_F[0, 4] = _F[1, 5] = _F[2, 6] = 1.0
_H = np.zeros((4, 7))
_H[0, 0] = _H[1, 1] = _H[2, 2] = _H[3, 3] = 1.0
_Q = np.diag([1.0, 1.0, 1.0, 0.01, 0.25, 0.25, 0.0001])
_R = np.diag([1.0, 1.0, 10.0, 0.01])
_P0 = np.diag([1.0, 1.0, 10.0, 0.01, 100.0, 100.0, 1.0])
_MIN_AREA = 1.0  # px^2 clamp on the area component


@dataclass
class KalmanBoxState:
    x: np.ndarray  # (7,)
    P: np.ndarray  # (7,7)


def box_to_measurement(box):
    u = box.left + box.width / 2
    v = box.top + box.height / 2
    s = box.width * box.height
    r = box.width / box.height
    return np.array([u, v, s, r])


def state_to_box(x):
    s = max(x[2], _MIN_AREA)
    r = max(x[3], 1e-6)
    w = np.sqrt(s * r)
    h = s / w
    return Box(x[0] - w / 2, x[1] - h / 2, w, h)


def kalman_init(box):
    x = np.zeros(7)
    x[:4] = box_to_measurement(box)
    return KalmanBoxState(x=x, P=_P0.copy())


def _kf_predict(state):
    x = _F @ state.x
    P = _F @ state.P @ _F.T + _Q
    x[2] = max(x[2], _MIN_AREA)
    return KalmanBoxState(x=x, P=P)


def _kf_update(state, box):
    z = box_to_measurement(box)
    y = z - _H @ state.x
    S = _H @ state.P @ _H.T + _R
    K = state.P @ _H.T @ np.linalg.inv(S)
    x = state.x + K @ y
    P = (np.eye(7) - K @ _H) @ state.P
    P = 0.5 * (P + P.T)  # keep symmetric
    x[2] = max(x[2], _MIN_AREA)
    return KalmanBoxState(x=x, P=P)


def kalman_step(state, measurement=None):
    """Constant-velocity predict, then update when a box is measured.

    Pure: returns a new KalmanBoxState.  The area component is clamped to
    stay positive.
    """
    state = _kf_predict(state)
    if measurement is not None:
        state = _kf_update(state, measurement)
    return state


@dataclass
class _SortTrack:
    state: KalmanBoxState
    created: int
    hit_streak: int = 1
    misses: int = 0
    emitted: list = field(default_factory=list)


def track_sort(dets_by_frame, params=None, n_frames=None):
    """SORT: Kalman prediction + Hungarian IOU association.

    Tracks emit boxes only while their consecutive-hit streak has reached
    min_hits; they die after surviving max_age consecutive misses.  A track
    that bridges a gap keeps its identity (boxes simply skip the gap frames).
    """
    if params is None:
        params = SortParams()
    tracks = []
    dead = []
    seq = 0

    for frame in _frame_range(dets_by_frame, n_frames):
        dets = dets_by_frame.get(frame, [])
        # predict
        for t in tracks:
            t.state = _kf_predict(t.state)
        # associate on cost 1 - IOU, gated by iou_threshold
        matches = {}
        if tracks and dets:
            cost = 1.0 - iou_matrix([state_to_box(t.state.x) for t in tracks],
                                    [d.box for d in dets])
            for i, j in solve_assignment(cost):
                if 1.0 - cost[i, j] >= params.iou_threshold:
                    matches[i] = j
        survivors = []
        for i, t in enumerate(tracks):
            if i in matches:
                t.state = _kf_update(t.state, dets[matches[i]].box)
                t.misses = 0
                t.hit_streak += 1
                if t.hit_streak >= params.min_hits:
                    t.emitted.append((frame, state_to_box(t.state.x)))
                survivors.append(t)
            else:
                t.misses += 1
                t.hit_streak = 0
                if t.misses > params.max_age:
                    dead.append(t)
                else:
                    survivors.append(t)
        tracks = survivors
        matched_det_idx = set(matches.values())
        for det_idx in range(len(dets)):
            if det_idx not in matched_det_idx:
                seq += 1
                t = _SortTrack(state=kalman_init(dets[det_idx].box), created=seq)
                if params.min_hits <= 1:
                    t.emitted.append((frame, state_to_box(t.state.x)))
                tracks.append(t)
    dead.extend(tracks)
    kept = [t for t in dead if t.emitted]
    kept.sort(key=lambda t: (t.emitted[0][0], t.created))
    return [Track(hyp_id=i + 1, boxes=t.emitted) for i, t in enumerate(kept)]
