import numpy as np
import pytest

from crowdsim.config import ConfigError
from crowdsim.geometry import points_in_convex
from crowdsim.world import BUILTIN_PLACES, build_world, build_world_from_text

from conftest import OPEN_WORLD


def clip_polygon_to_rect(poly, rect):
    """Sutherland-Hodgman clip; independent oracle for grid blocking."""
    xmin, ymin, xmax, ymax = rect
    def clip(pts, inside, intersect):
        out = []
        for i in range(len(pts)):
            a, b = pts[i - 1], pts[i]
            ain, bin_ = inside(a), inside(b)
            if bin_:
                if not ain:
                    out.append(intersect(a, b))
                out.append(b)
            elif ain:
                out.append(intersect(a, b))
        return out
    def x_cut(x):
        return lambda a, b: (x, a[1] + (b[1] - a[1]) * (x - a[0]) / (b[0] - a[0]))
    def y_cut(y):
        return lambda a, b: (a[0] + (b[0] - a[0]) * (y - a[1]) / (b[1] - a[1]), y)
    pts = [tuple(p) for p in poly]
    for inside, intersect in [
        (lambda p: p[0] >= xmin, x_cut(xmin)),
        (lambda p: p[0] <= xmax, x_cut(xmax)),
        (lambda p: p[1] >= ymin, y_cut(ymin)),
        (lambda p: p[1] <= ymax, y_cut(ymax)),
    ]:
        pts = clip(pts, inside, intersect)
        if not pts:
            return 0.0
    area = 0.0
    for i in range(len(pts)):
        x0, y0 = pts[i - 1]
        x1, y1 = pts[i]
        area += x0 * y1 - x1 * y0
    return abs(area) / 2.0


@pytest.mark.parametrize("name", sorted(BUILTIN_PLACES))
def test_builtin_places_satisfy_invariants(name):
    w = build_world(name)
    xmin, ymin, xmax, ymax = w.bounds
    for p in w.spawn_points + w.goal_points:
        assert xmin <= p[0] <= xmax and ymin <= p[1] <= ymax
        for poly in w.obstacles:
            assert not points_in_convex(poly, [p])[0]
    for z in w.zones:
        assert z.leave_radius > z.radius
        assert z.required_agents >= 2
    assert len(w.cameras) == 3


def test_park_has_obstacles_and_spawns():
    w = build_world("park")
    assert len(w.obstacles) > 0
    assert len(w.spawn_points) >= 4


def test_unknown_place_errors():
    with pytest.raises(ConfigError, match="unknown place"):
        build_world("atlantis")


def test_empty_obstacle_list_gives_free_grid():
    w = build_world_from_text(OPEN_WORLD)
    assert not w.nav_grid.any()


def test_spawn_inside_obstacle_names_point():
    spec = """
bounds = 0 0 10 10
obstacle = 2,2 8,2 8,8 2,8
spawn = 5,5
goal = 1,1
"""
    with pytest.raises(ConfigError, match=r"\(5, 5\).*inside an obstacle"):
        build_world_from_text(spec)


def test_nonconvex_obstacle_rejected():
    spec = """
bounds = 0 0 10 10
obstacle = 0,0 4,0 4,4 2,1 0,4
spawn = 8,8
goal = 9,9
"""
    with pytest.raises(ConfigError, match="convex"):
        build_world_from_text(spec)


def test_nav_grid_blocked_iff_positive_overlap(rng):
    """Grid blocking matches an independent polygon-clipping area oracle."""
    for trial in range(10):
        cx, cy = rng.uniform(3, 17), rng.uniform(3, 12)
        k = int(rng.integers(3, 7))
        angles = np.sort(rng.uniform(0, 2 * np.pi, k))
        radius = rng.uniform(1.0, 3.0)
        pts = np.stack([cx + radius * np.cos(angles), cy + radius * np.sin(angles)], axis=1)
        hull_txt = " ".join(f"{p[0]:.3f},{p[1]:.3f}" for p in pts)
        spec = f"""
bounds = 0 0 20 15
obstacle = {hull_txt}
spawn = 0.5,0.5
goal = 19.5,14.5
"""
        try:
            w = build_world_from_text(spec)
        except ConfigError:
            continue  # degenerate polygon or spawn/goal clash; skip draw
        poly = w.obstacles[0]
        ny, nx = w.nav_grid.shape
        for iy in range(ny):
            for ix in range(nx):
                rect = (ix * 0.5, iy * 0.5, (ix + 1) * 0.5, (iy + 1) * 0.5)
                area = clip_polygon_to_rect(poly, rect)
                assert w.nav_grid[iy, ix] == (area > 1e-9), (trial, ix, iy, area)


def test_point_cell_round_trip():
    w = build_world("square")
    cell = w.point_to_cell((10.1, 12.9))
    cx, cy = w.cell_center(cell)
    assert abs(cx - 10.1) <= 0.25 + 1e-9 and abs(cy - 12.9) <= 0.25 + 1e-9
