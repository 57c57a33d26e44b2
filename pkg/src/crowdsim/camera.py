"""Pinhole camera model: projects world-space axis-aligned boxes to image boxes.

World frame: x/y on the ground plane, z up (meters).  Image frame: u right,
v down, origin at the top-left corner (pixels).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .boxes import Box, clip_to_image

NEAR_PLANE = 0.1  # meters

# 8 corner selectors of an axis-aligned box, (lo|hi) per axis
_CORNER_MASK = np.array(
    [[i >> 2 & 1, i >> 1 & 1, i & 1] for i in range(8)], dtype=float
)


@dataclass
class Camera:
    position: tuple  # (x, y, z) meters
    look_at: tuple   # (x, y, z) meters
    fx: float = 800.0
    fy: float = 800.0
    cx: float = 400.0
    cy: float = 300.0
    width: int = 800
    height: int = 600
    _rot: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.fx <= 0 or self.fy <= 0:
            raise ValueError("focal lengths must be positive")
        if not (0 <= self.cx < self.width and 0 <= self.cy < self.height):
            raise ValueError("principal point must lie inside the image")
        pos = np.asarray(self.position, dtype=float)
        fwd = np.asarray(self.look_at, dtype=float) - pos
        norm = np.linalg.norm(fwd)
        if norm == 0.0:
            raise ValueError("camera position and look_at coincide")
        fwd /= norm
        up_world = np.array([0.0, 0.0, 1.0])
        right = np.cross(fwd, up_world)
        rn = np.linalg.norm(right)
        if rn < 1e-9:
            raise ValueError("camera looking straight up/down is unsupported")
        right /= rn
        down = np.cross(fwd, right)  # image v axis points down
        # rows: camera x (right), camera y (down), camera z (forward)
        self._rot = np.stack([right, down, fwd])

    def world_to_cam(self, points):
        """Map (n,3) world points to camera coordinates."""
        pts = np.asarray(points, dtype=float) - np.asarray(self.position, dtype=float)
        return pts @ self._rot.T

    def cam_to_pixel(self, pts_cam):
        """Perspective-divide (n,3) camera points to (n,2) pixels."""
        z = pts_cam[:, 2]
        u = self.cx + self.fx * pts_cam[:, 0] / z
        v = self.cy + self.fy * pts_cam[:, 1] / z
        return np.stack([u, v], axis=1)


def box_corners(lo, hi):
    """The 8 corners of an axis-aligned box given min/max corners."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    return lo + _CORNER_MASK * (hi - lo)


_BOX_EDGES = [
    (0, 1), (0, 2), (0, 4), (3, 1), (3, 2), (3, 7),
    (5, 1), (5, 4), (5, 7), (6, 2), (6, 4), (6, 7),
]


def _rect_from_cam_corners(camera, cam_pts):
    """Pixel bounding rectangle of camera-space box corners, near-plane aware.

    Edges crossing the near plane are clipped so that partially-behind boxes
    still produce a rectangle covering their visible corners.
    """
    z = cam_pts[:, 2]
    front = z >= NEAR_PLANE
    if not front.any():
        return None
    pts = [cam_pts[front]]
    if not front.all():
        for a, b in _BOX_EDGES:
            if front[a] == front[b]:
                continue
            pa, pb = cam_pts[a], cam_pts[b]
            t = (NEAR_PLANE - pa[2]) / (pb[2] - pa[2])
            pts.append((pa + t * (pb - pa))[None, :])
    allpts = np.concatenate(pts, axis=0)
    pix = camera.cam_to_pixel(allpts)
    umin, vmin = pix.min(axis=0)
    umax, vmax = pix.max(axis=0)
    return Box(umin, vmin, umax - umin, vmax - vmin)


def project_box(camera, lo, hi):
    """Project a world axis-aligned box to a clipped image box.

    Returns None when the box is entirely behind the near plane or falls
    outside the image.
    """
    cam_pts = camera.world_to_cam(box_corners(lo, hi))
    rect = _rect_from_cam_corners(camera, cam_pts)
    if rect is None:
        return None
    return clip_to_image(rect, camera.width, camera.height)


def project_boxes(camera, los, his):
    """Project many boxes at once.

    Returns (boxes, depths): boxes is a list of Box-or-None, depths the
    camera-frame z of each box center (the occlusion/fog depth).
    """
    los = np.asarray(los, dtype=float).reshape(-1, 3)
    his = np.asarray(his, dtype=float).reshape(-1, 3)
    n = los.shape[0]
    if n == 0:
        return [], np.zeros(0)
    corners = los[:, None, :] + _CORNER_MASK[None, :, :] * (his - los)[:, None, :]
    cam_pts = camera.world_to_cam(corners.reshape(-1, 3)).reshape(n, 8, 3)
    depths = camera.world_to_cam(0.5 * (los + his))[:, 2]

    z = cam_pts[:, :, 2]
    all_front = (z >= NEAR_PLANE).all(axis=1)
    boxes = [None] * n
    if all_front.any():
        idx = np.nonzero(all_front)[0]
        pts = cam_pts[idx]
        u = camera.cx + camera.fx * pts[:, :, 0] / pts[:, :, 2]
        v = camera.cy + camera.fy * pts[:, :, 1] / pts[:, :, 2]
        umin, umax = u.min(axis=1), u.max(axis=1)
        vmin, vmax = v.min(axis=1), v.max(axis=1)
        for k, i in enumerate(idx):
            boxes[i] = clip_to_image(
                Box(umin[k], vmin[k], umax[k] - umin[k], vmax[k] - vmin[k]),
                camera.width, camera.height,
            )
    # slow path only for boxes straddling the near plane
    for i in np.nonzero(~all_front)[0]:
        rect = _rect_from_cam_corners(camera, cam_pts[i])
        boxes[i] = None if rect is None else clip_to_image(rect, camera.width, camera.height)
    return boxes, depths
