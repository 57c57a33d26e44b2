"""Small 2D geometry kit for convex obstacle polygons."""

from __future__ import annotations

import numpy as np


def polygon_area(pts):
    """Signed area (positive for counter-clockwise winding)."""
    x = pts[:, 0]
    y = pts[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def ensure_ccw(pts):
    pts = np.asarray(pts, dtype=float)
    if polygon_area(pts) < 0:
        return pts[::-1].copy()
    return pts


def is_convex(pts):
    """True when the polygon is convex (collinear runs tolerated)."""
    n = len(pts)
    if n < 3:
        return False
    sign = 0
    for i in range(n):
        a = pts[i]
        b = pts[(i + 1) % n]
        c = pts[(i + 2) % n]
        cross = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0])
        if abs(cross) < 1e-12:
            continue
        s = 1 if cross > 0 else -1
        if sign == 0:
            sign = s
        elif s != sign:
            return False
    return sign != 0


def points_in_convex(poly, pts):
    """Vectorized containment test (boundary counts as inside).

    poly: (k,2) CCW vertices; pts: (n,2).  Returns bool (n,).
    """
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    inside = np.ones(len(pts), dtype=bool)
    for i in range(len(poly)):
        a = poly[i]
        b = poly[(i + 1) % len(poly)]
        cross = (b[0] - a[0]) * (pts[:, 1] - a[1]) - (b[1] - a[1]) * (pts[:, 0] - a[0])
        inside &= cross >= -1e-12
    return inside


def boundary_distance(poly, pts):
    """Distance from points to the polygon boundary plus closest points.

    Returns (dist (n,), closest (n,2)).  Distance is to the boundary, not the
    solid: callers combine it with points_in_convex for clearance.
    """
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    n = len(pts)
    best_d2 = np.full(n, np.inf)
    best_pt = np.zeros((n, 2))
    for i in range(len(poly)):
        a = poly[i]
        b = poly[(i + 1) % len(poly)]
        ab = b - a
        denom = float(ab @ ab)
        if denom == 0.0:
            proj = np.tile(a, (n, 1))
        else:
            t = np.clip(((pts - a) @ ab) / denom, 0.0, 1.0)
            proj = a + t[:, None] * ab
        d2 = np.sum((pts - proj) ** 2, axis=1)
        better = d2 < best_d2
        best_d2[better] = d2[better]
        best_pt[better] = proj[better]
    return np.sqrt(best_d2), best_pt


def clearance(poly, pts):
    """Signed clearance to the polygon solid: negative inside.

    Returns (signed_dist (n,), outward_dir (n,2)); the direction pushes a
    point away from the polygon (unit vectors; zero only in degenerate ties).
    """
    dist, closest = boundary_distance(poly, pts)
    inside = points_in_convex(poly, pts)
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    out = pts - closest
    norm = np.linalg.norm(out, axis=1)
    safe = norm > 1e-12
    out[safe] /= norm[safe, None]
    out[~safe] = (1.0, 0.0)
    out[inside] *= -1.0
    signed = np.where(inside, -dist, dist)
    return signed, out


def _project_interval(pts, axis):
    vals = pts @ axis
    return vals.min(), vals.max()


def poly_intersects_rect(poly, rect, tol=1e-9):
    """Positive-area overlap test between a convex polygon and an AABB (SAT).

    rect = (xmin, ymin, xmax, ymax).  Touching along an edge or point does
    not count as an intersection.
    """
    xmin, ymin, xmax, ymax = rect
    rect_pts = np.array(
        [[xmin, ymin], [xmax, ymin], [xmax, ymax], [xmin, ymax]], dtype=float
    )
    axes = [np.array([1.0, 0.0]), np.array([0.0, 1.0])]
    for i in range(len(poly)):
        e = poly[(i + 1) % len(poly)] - poly[i]
        n = np.array([-e[1], e[0]])
        ln = np.linalg.norm(n)
        if ln > 1e-12:
            axes.append(n / ln)
    for axis in axes:
        a0, a1 = _project_interval(poly, axis)
        b0, b1 = _project_interval(rect_pts, axis)
        if min(a1, b1) - max(a0, b0) <= tol:
            return False
    return True
