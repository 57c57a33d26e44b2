"""Walkable world: bounds, convex obstacles, spawn/goal points, interaction
zones, a 0.5 m occupancy grid for path planning, and per-place camera poses.

Places are described by plain-text specs (grammar in README).  Three built-in
places ship with the package: "square", "park" and "junction".
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from . import config as cfg
from .camera import Camera
from .geometry import ensure_ccw, is_convex, points_in_convex, poly_intersects_rect

CELL_SIZE = 0.5  # meters

DEFAULT_P_IGNORE = 0.5      # chance an agent ignores a zone encounter (calibrated stand-in)
ZONE_IGNORE_COOLDOWN_S = 30.0


@dataclass
class Zone:
    center: tuple
    radius: float
    kind: str
    required_agents: int
    duration_s: float
    leave_radius: float
    p_ignore: float = DEFAULT_P_IGNORE
    queue: list = field(default_factory=list)       # waiting agent ids, FIFO
    active: list = field(default_factory=list)      # interacting agent ids
    active_until: float = 0.0
    ignore_until: dict = field(default_factory=dict)  # agent id -> sim time


@dataclass
class World:
    name: str
    bounds: tuple  # (xmin, ymin, xmax, ymax)
    obstacles: list  # list of (k,2) CCW convex polygons
    spawn_points: list
    goal_points: list
    zones: list
    nav_grid: np.ndarray  # bool [ny, nx], True = blocked
    cameras: list
    cell_size: float = CELL_SIZE

    def point_to_cell(self, p):
        xmin, ymin, xmax, ymax = self.bounds
        ny, nx = self.nav_grid.shape
        ix = min(max(int((p[0] - xmin) / self.cell_size), 0), nx - 1)
        iy = min(max(int((p[1] - ymin) / self.cell_size), 0), ny - 1)
        return (ix, iy)

    def cell_center(self, cell):
        xmin, ymin, _, _ = self.bounds
        return (
            xmin + (cell[0] + 0.5) * self.cell_size,
            ymin + (cell[1] + 0.5) * self.cell_size,
        )

    def contains(self, p):
        xmin, ymin, xmax, ymax = self.bounds
        return xmin <= p[0] <= xmax and ymin <= p[1] <= ymax


def build_nav_grid(bounds, obstacles, cell_size=CELL_SIZE):
    """Occupancy grid: a cell is blocked iff it overlaps an obstacle."""
    xmin, ymin, xmax, ymax = bounds
    nx = max(1, int(round((xmax - xmin) / cell_size)))
    ny = max(1, int(round((ymax - ymin) / cell_size)))
    grid = np.zeros((ny, nx), dtype=bool)
    for poly in obstacles:
        pxmin, pymin = poly.min(axis=0)
        pxmax, pymax = poly.max(axis=0)
        ix0 = max(0, int((pxmin - xmin) / cell_size) - 1)
        ix1 = min(nx - 1, int((pxmax - xmin) / cell_size) + 1)
        iy0 = max(0, int((pymin - ymin) / cell_size) - 1)
        iy1 = min(ny - 1, int((pymax - ymin) / cell_size) + 1)
        for iy in range(iy0, iy1 + 1):
            for ix in range(ix0, ix1 + 1):
                if grid[iy, ix]:
                    continue
                rect = (
                    xmin + ix * cell_size,
                    ymin + iy * cell_size,
                    xmin + (ix + 1) * cell_size,
                    ymin + (iy + 1) * cell_size,
                )
                if poly_intersects_rect(poly, rect):
                    grid[iy, ix] = True
    return grid


def _parse_zone(value, where):
    fields = cfg.parse_fields(
        value, where,
        required=("kind", "center", "radius", "required", "duration", "leave"),
        optional=("p_ignore",),
    )
    radius = cfg.parse_float(fields["radius"], where)
    leave = cfg.parse_float(fields["leave"], where)
    required = cfg.parse_int(fields["required"], where)
    if required < 2:
        raise cfg.ConfigError(f"{where}: zone requires at least 2 agents")
    if leave <= radius:
        raise cfg.ConfigError(f"{where}: leave radius must exceed zone radius")
    return Zone(
        center=cfg.parse_point(fields["center"], where),
        radius=radius,
        kind=fields["kind"],
        required_agents=required,
        duration_s=cfg.parse_float(fields["duration"], where),
        leave_radius=leave,
        p_ignore=cfg.parse_float(fields.get("p_ignore", str(DEFAULT_P_IGNORE)), where),
    )


def parse_camera_line(value, where):
    fields = cfg.parse_fields(value, where, required=("pos", "look"), optional=("f",))
    f = cfg.parse_float(fields.get("f", "800"), where)
    return Camera(
        position=cfg.parse_point3(fields["pos"], where),
        look_at=cfg.parse_point3(fields["look"], where),
        fx=f, fy=f,
    )


def _parse_place(entries, source, name_hint):
    d = cfg.entries_to_dict(
        entries, repeatable=("spawn", "goal", "obstacle", "zone", "camera"),
        source=source,
    )
    def where(lineno):
        return f"{source}:{lineno}"

    if "bounds" not in d:
        raise cfg.ConfigError(f"{source}: missing 'bounds'")
    bval, blineno = d["bounds"]
    nums = cfg.parse_floats(bval, where(blineno))
    if len(nums) != 4 or nums[2] <= nums[0] or nums[3] <= nums[1]:
        raise cfg.ConfigError(f"{where(blineno)}: bounds must be 'xmin ymin xmax ymax'")
    bounds = tuple(nums)

    name = d["name"][0] if "name" in d else name_hint

    obstacles = []
    for val, lineno in d.get("obstacle", []):
        pts = np.array(cfg.parse_points(val, where(lineno)), dtype=float)
        if len(pts) < 3:
            raise cfg.ConfigError(f"{where(lineno)}: obstacle needs at least 3 points")
        if not is_convex(pts):
            raise cfg.ConfigError(f"{where(lineno)}: obstacle polygon must be convex")
        obstacles.append(ensure_ccw(pts))

    spawns = [cfg.parse_point(v, where(ln)) for v, ln in d.get("spawn", [])]
    goals = [cfg.parse_point(v, where(ln)) for v, ln in d.get("goal", [])]
    if not spawns:
        raise cfg.ConfigError(f"{source}: at least one 'spawn' point is required")
    if not goals:
        raise cfg.ConfigError(f"{source}: at least one 'goal' point is required")

    zones = [_parse_zone(v, where(ln)) for v, ln in d.get("zone", [])]
    cameras = [parse_camera_line(v, where(ln)) for v, ln in d.get("camera", [])]

    grid = build_nav_grid(bounds, obstacles)
    world = World(
        name=name, bounds=bounds, obstacles=obstacles,
        spawn_points=spawns, goal_points=goals, zones=zones,
        nav_grid=grid, cameras=cameras,
    )
    _validate_world(world, source)
    return world


def _validate_world(world, source):
    for label, pts in (("spawn", world.spawn_points), ("goal", world.goal_points)):
        for p in pts:
            if not world.contains(p):
                raise cfg.ConfigError(
                    f"{source}: {label} point ({p[0]:g}, {p[1]:g}) lies outside bounds"
                )
            for poly in world.obstacles:
                if points_in_convex(poly, [p])[0]:
                    raise cfg.ConfigError(
                        f"{source}: {label} point ({p[0]:g}, {p[1]:g}) lies inside an obstacle"
                    )
            cell = world.point_to_cell(p)
            if world.nav_grid[cell[1], cell[0]]:
                raise cfg.ConfigError(
                    f"{source}: {label} point ({p[0]:g}, {p[1]:g}) falls on a blocked nav cell"
                )
    for z in world.zones:
        if not world.contains(z.center):
            raise cfg.ConfigError(f"{source}: zone center {z.center} lies outside bounds")


# Built-in places.  Layouts keep the activity hull (spawns, goals, zones)
# fully inside all three camera views so bodies never cross the image border;
# poses and focal lengths are artifact defaults, tuned for that coverage.

_SQUARE_SPEC = """
name = square
bounds = 0 0 60 49
# fountain
obstacle = 32.5,24.5 31.77,26.27 30,27 28.23,26.27 27.5,24.5 28.23,22.73 30,22 31.77,22.73
# kiosk
obstacle = 13,33 17,33 17,36 13,36
# planter
obstacle = 42,13 46,13 46,16 42,16
spawn = 8,12
spawn = 8,37
spawn = 52,12
spawn = 52,37
spawn = 20,8
spawn = 40,8
spawn = 20,41
spawn = 40,41
goal = 16,24
goal = 44,24
goal = 30,12
goal = 30,37
goal = 21,16
goal = 39,33
goal = 39,16
goal = 21,33
zone = kind:dance center:38,30 radius:2 required:2 duration:8 leave:5
zone = kind:fight center:20,18 radius:2 required:2 duration:6 leave:5
camera = pos:30,24.4,70 look:30,24.5,0 f:1130
camera = pos:58,52,30 look:30,24.5,0 f:560
camera = pos:2,52,30 look:30,24.5,0 f:560
"""

_PARK_SPEC = """
name = park
bounds = 0 0 58 46
# pond
obstacle = 24,28 22,31.46 18,31.46 16,28 18,24.54 22,24.54
# grove
obstacle = 36,12 44,12 44,18 36,18
# kiosk
obstacle = 40,30 44,30 44,34 40,34
spawn = 8,10
spawn = 8,36
spawn = 50,10
spawn = 50,36
spawn = 29,8
spawn = 29,38
goal = 14,22
goal = 44,22
goal = 29,12
goal = 29,34
goal = 19,14
goal = 37,33
goal = 47,13
goal = 14,31
zone = kind:dance center:34,26 radius:2 required:2 duration:8 leave:5
zone = kind:fight center:14,16 radius:2 required:2 duration:6 leave:5
camera = pos:29,22.9,70 look:29,23,0 f:1130
camera = pos:57,50,30 look:29,23,0 f:560
camera = pos:1,50,30 look:29,23,0 f:560
"""

_JUNCTION_SPEC = """
name = junction
bounds = 0 0 80 60
# corner buildings
obstacle = 8,8 32,8 32,22 8,22
obstacle = 48,8 72,8 72,22 48,22
obstacle = 8,38 32,38 32,52 8,52
obstacle = 48,38 72,38 72,52 48,52
spawn = 34,16
spawn = 46,16
spawn = 34,44
spawn = 46,44
spawn = 26,26
spawn = 26,34
spawn = 54,26
spawn = 54,34
goal = 40,24
goal = 40,36
goal = 34,30
goal = 46,30
goal = 40,30
goal = 36,18
goal = 44,42
goal = 28,30
zone = kind:dance center:44,34 radius:2 required:2 duration:8 leave:5
zone = kind:fight center:36,26 radius:2 required:2 duration:6 leave:5
camera = pos:40,29.9,70 look:40,30,0 f:1300
camera = pos:66,56,30 look:40,30,0 f:560
camera = pos:14,56,30 look:40,30,0 f:560
"""

BUILTIN_PLACES = {
    "square": _SQUARE_SPEC,
    "park": _PARK_SPEC,
    "junction": _JUNCTION_SPEC,
}


def build_world(place_spec):
    """Build a validated World from a built-in name or a place spec file."""
    if place_spec in BUILTIN_PLACES:
        entries = cfg.parse_kv_lines(BUILTIN_PLACES[place_spec], source=f"<builtin:{place_spec}>")
        return _parse_place(entries, f"<builtin:{place_spec}>", place_spec)
    if os.path.exists(str(place_spec)):
        entries = cfg.read_kv_file(place_spec)
        name_hint = os.path.splitext(os.path.basename(str(place_spec)))[0]
        return _parse_place(entries, str(place_spec), name_hint)
    raise cfg.ConfigError(
        f"unknown place {place_spec!r} (built-ins: {', '.join(sorted(BUILTIN_PLACES))})"
    )


def build_world_from_text(text, source="<place>", name_hint="custom"):
    entries = cfg.parse_kv_lines(text, source=source)
    return _parse_place(entries, source, name_hint)
