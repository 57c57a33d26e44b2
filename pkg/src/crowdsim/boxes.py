"""Axis-aligned 2D boxes in pixel coordinates (left/top/width/height)."""

from __future__ import annotations

from typing import NamedTuple


class Box(NamedTuple):
    left: float
    top: float
    width: float
    height: float

    @property
    def right(self):
        return self.left + self.width

    @property
    def bottom(self):
        return self.top + self.height

    @property
    def area(self):
        return self.width * self.height

    @property
    def center(self):
        return (self.left + 0.5 * self.width, self.top + 0.5 * self.height)


def iou(a, b):
    """Intersection over union of two boxes; 0.0 for disjoint boxes."""
    ix = min(a.left + a.width, b.left + b.width) - max(a.left, b.left)
    if ix <= 0.0:
        return 0.0
    iy = min(a.top + a.height, b.top + b.height) - max(a.top, b.top)
    if iy <= 0.0:
        return 0.0
    inter = ix * iy
    union = a.width * a.height + b.width * b.height - inter
    return inter / union


def clip_to_image(box, width, height):
    """Clip a box to the image rectangle; None if nothing remains."""
    left = max(box.left, 0.0)
    top = max(box.top, 0.0)
    right = min(box.left + box.width, float(width))
    bottom = min(box.top + box.height, float(height))
    if right - left <= 0.0 or bottom - top <= 0.0:
        return None
    return Box(left, top, right - left, bottom - top)
