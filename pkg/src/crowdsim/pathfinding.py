"""Grid path planning: A* over an 8-connected occupancy grid.

Costs are 1 per straight move and sqrt(2) per diagonal.  Diagonal moves are
forbidden when either adjacent orthogonal cell is blocked, so path segments
never cut obstacle corners.  Path cost is tracked as (straight, diagonal)
step counts and evaluated as ``s + d*sqrt(2)`` so equal-cost paths compare
exactly equal regardless of step order.
"""

from __future__ import annotations

import math
from heapq import heappush, heappop

import numpy as np

SQRT2 = math.sqrt(2.0)

# (dx, dy, is_diagonal)
_MOVES = [
    (1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0),
    (1, 1, 1), (1, -1, 1), (-1, 1, 1), (-1, -1, 1),
]


def _octile(ax, ay, bx, by):
    dx = abs(ax - bx)
    dy = abs(ay - by)
    lo = min(dx, dy)
    return (dx + dy - 2 * lo) + lo * SQRT2


def grid_path(blocked, start, goal):
    """A* from start to goal cell, both (ix, iy).

    `blocked` is a bool array indexed [iy, ix].  Returns (cells, cost) where
    cells is the list of cells start..goal inclusive, or (None, None) when no
    path exists.  Ties on f are expanded lowest-y-then-x first.
    """
    ny, nx = blocked.shape
    sx, sy = start
    gx, gy = goal
    if blocked[sy, sx] or blocked[gy, gx]:
        return None, None
    if start == goal:
        return [start], 0.0

    best = {start: (0, 0)}  # cell -> (straight, diagonal) of best-known path
    came = {}
    heap = [(_octile(sx, sy, gx, gy), sy, sx)]
    closed = set()
    while heap:
        _, cy, cx = heappop(heap)
        cell = (cx, cy)
        if cell in closed:
            continue
        closed.add(cell)
        if cell == goal:
            path = [cell]
            while cell in came:
                cell = came[cell]
                path.append(cell)
            path.reverse()
            s, d = best[goal]
            return path, s + d * SQRT2
        s, d = best[cell]
        for dx, dy, diag in _MOVES:
            mx, my = cx + dx, cy + dy
            if not (0 <= mx < nx and 0 <= my < ny) or blocked[my, mx]:
                continue
            if diag and (blocked[cy, mx] or blocked[my, cx]):
                continue  # no corner cutting
            ns, nd = s + 1 - diag, d + diag
            ng = ns + nd * SQRT2
            prev = best.get((mx, my))
            if prev is not None and prev[0] + prev[1] * SQRT2 <= ng:
                continue
            best[(mx, my)] = (ns, nd)
            came[(mx, my)] = cell
            heappush(heap, (ng + _octile(mx, my, gx, gy), my, mx))
    return None, None


def plan_path(world, start, goal):
    """Plan waypoints from start to goal through the world's nav grid.

    Returns a list of (x, y) waypoints ending exactly at `goal`, or None when
    the goal is unreachable.  start == goal yields the single waypoint [goal].
    """
    start = (float(start[0]), float(start[1]))
    goal = (float(goal[0]), float(goal[1]))
    if start == goal:
        return [goal]
    c0 = world.point_to_cell(start)
    c1 = world.point_to_cell(goal)
    cells, _ = grid_path(world.nav_grid, c0, c1)
    if cells is None:
        return None
    waypoints = [world.cell_center(c) for c in cells[1:-1]]
    waypoints.append(goal)
    return waypoints


def path_length(points):
    pts = np.asarray(points, dtype=float)
    if len(pts) < 2:
        return 0.0
    return float(np.sum(np.linalg.norm(np.diff(pts, axis=0), axis=1)))
