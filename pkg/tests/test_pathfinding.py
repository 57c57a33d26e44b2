import math
from heapq import heappop, heappush

import numpy as np
import pytest

from crowdsim.pathfinding import SQRT2, grid_path, plan_path
from crowdsim.world import build_world_from_text

from conftest import OPEN_WORLD, WALLED_WORLD


def dijkstra_cost(blocked, start, goal):
    """Independent oracle: plain Dijkstra over the same move rules."""
    ny, nx = blocked.shape
    if blocked[start[1], start[0]] or blocked[goal[1], goal[0]]:
        return None
    best = {start: (0, 0)}
    heap = [(0.0, start)]
    done = set()
    while heap:
        g, cell = heappop(heap)
        if cell in done:
            continue
        done.add(cell)
        if cell == goal:
            s, d = best[cell]
            return s + d * SQRT2
        cx, cy = cell
        s, d = best[cell]
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                if dx == 0 and dy == 0:
                    continue
                mx, my = cx + dx, cy + dy
                if not (0 <= mx < nx and 0 <= my < ny) or blocked[my, mx]:
                    continue
                diag = dx != 0 and dy != 0
                if diag and (blocked[cy, mx] or blocked[my, cx]):
                    continue
                ns, nd = s + (not diag), d + diag
                ng = ns + nd * SQRT2
                prev = best.get((mx, my))
                if prev is None or ng < prev[0] + prev[1] * SQRT2:
                    best[(mx, my)] = (ns, nd)
                    heappush(heap, (ng, (mx, my)))
    return None


def test_empty_grid_diagonal_cost_exact():
    blocked = np.zeros((10, 10), dtype=bool)
    cells, cost = grid_path(blocked, (0, 0), (9, 9))
    assert cells[0] == (0, 0) and cells[-1] == (9, 9)
    assert abs(cost - 9 * math.sqrt(2)) < 1e-9


def test_astar_matches_dijkstra_on_random_grids():
    rng = np.random.default_rng(42)
    checked = 0
    while checked < 50:
        blocked = rng.random((20, 20)) < 0.25
        free = np.argwhere(~blocked)
        if len(free) < 2:
            continue
        si, gi = rng.integers(0, len(free), 2)
        start = (int(free[si][1]), int(free[si][0]))
        goal = (int(free[gi][1]), int(free[gi][0]))
        _, cost = grid_path(blocked, start, goal)
        oracle = dijkstra_cost(blocked, start, goal)
        assert (cost is None) == (oracle is None)
        if cost is not None:
            assert cost == oracle  # exact: both track (straight, diagonal) counts
        checked += 1


def test_start_equals_goal_single_waypoint():
    w = build_world_from_text(OPEN_WORLD)
    assert plan_path(w, (3.0, 3.0), (3.0, 3.0)) == [(3.0, 3.0)]


def test_unreachable_goal_returns_none():
    spec = """
bounds = 0 0 20 10
obstacle = 9,-1 11,-1 11,11 9,11
spawn = 2,5
goal = 18,5
"""
    # wall pierces the full height: right half unreachable from the left
    w = build_world_from_text(spec)
    assert plan_path(w, (2.0, 5.0), (18.0, 5.0)) is None


def test_path_ends_at_goal_and_avoids_walls():
    w = build_world_from_text(WALLED_WORLD)
    path = plan_path(w, (2.0, 2.0), (28.0, 10.0))
    assert path is not None and path[-1] == (28.0, 10.0)
    for x, y in path:
        cell = w.point_to_cell((x, y))
        assert not w.nav_grid[cell[1], cell[0]]


def test_blocked_goal_cell_is_no_path():
    w = build_world_from_text(WALLED_WORLD)
    assert plan_path(w, (2.0, 2.0), (15.0, 10.0)) is None  # inside the wall
