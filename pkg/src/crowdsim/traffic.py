"""Car micro-simulation on a directed road node graph.

Nodes are typed (crossing, turn, parking, ped_stop, plain); cars drive edges
at the speed limit, slow down near turns and crossings, yield to pedestrians
at ped stops, optionally park in bays, and pick random exits at crossings.
"""

from __future__ import annotations

import os
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from . import config as cfg

NODE_KINDS = ("crossing", "turn", "parking", "ped_stop", "plain")

CAR_LENGTH = 4.5   # m
CAR_WIDTH = 1.8    # m
CAR_HEIGHT = 1.5   # m
CAR_ID_BASE = 100000  # keeps car object ids disjoint from pedestrian ids

DRIVING = "driving"
PARKED = "parked"
YIELDING = "yielding"


@dataclass(frozen=True)
class RoadNode:
    id: int
    pos: tuple
    kind: str
    capacity: int = 0  # parking bays; only meaningful for kind == "parking"


@dataclass(frozen=True)
class RoadEdge:
    id: int
    src: int
    dst: int
    limit: float
    length: float


@dataclass
class RoadGraph:
    name: str
    nodes: dict          # node id -> RoadNode
    edges: dict          # edge id -> RoadEdge
    out_edges: dict      # node id -> [edge ids] in spec order
    entries: list        # edge ids cars spawn on

    def edge_dir(self, edge_id):
        e = self.edges[edge_id]
        a = np.asarray(self.nodes[e.src].pos, dtype=float)
        b = np.asarray(self.nodes[e.dst].pos, dtype=float)
        return (b - a) / e.length

    def edge_point(self, edge_id, s):
        e = self.edges[edge_id]
        a = np.asarray(self.nodes[e.src].pos, dtype=float)
        b = np.asarray(self.nodes[e.dst].pos, dtype=float)
        return a + (b - a) * (s / e.length)


@dataclass
class CarState:
    id: int
    edge: int
    s: float
    speed: float
    mode: str = DRIVING
    dwell_until: float = 0.0
    bay_node: int = None
    bay_index: int = 0
    prev_node: int = None  # node the current edge was entered from


@dataclass
class TrafficParams:
    spawn_period_s: float = 5.0   # one spawn attempt per period (config default)
    park_prob: float = 0.3
    park_dwell_range: tuple = (5.0, 15.0)
    slow_factor: float = 0.4
    slow_distance: float = 8.0
    ped_stop_radius: float = 3.0
    min_gap: float = 2.0
    stop_margin: float = 0.5


def _parse_road(entries, source, name_hint):
    d = cfg.entries_to_dict(entries, repeatable=("node", "edge", "entry"), source=source)
    nodes = {}
    for val, lineno in d.get("node", []):
        where = f"{source}:{lineno}"
        toks = val.split()
        if len(toks) < 3:
            raise cfg.ConfigError(f"{where}: node needs 'id kind x,y [cap:N]'")
        nid = cfg.parse_int(toks[0], where)
        kind = toks[1]
        if kind not in NODE_KINDS:
            raise cfg.ConfigError(f"{where}: unknown node kind {kind!r}")
        pos = cfg.parse_point(toks[2], where)
        capacity = 0
        for tok in toks[3:]:
            fields = cfg.parse_fields(tok, where, optional=("cap",))
            if "cap" in fields:
                capacity = cfg.parse_int(fields["cap"], where)
        if kind == "parking" and capacity < 1:
            raise cfg.ConfigError(f"{where}: parking node {nid} needs cap >= 1")
        if nid in nodes:
            raise cfg.ConfigError(f"{where}: duplicate node id {nid}")
        nodes[nid] = RoadNode(nid, pos, kind, capacity)

    edges = {}
    out_edges = defaultdict(list)
    for val, lineno in d.get("edge", []):
        where = f"{source}:{lineno}"
        toks = val.split()
        if len(toks) < 2:
            raise cfg.ConfigError(f"{where}: edge needs 'src dst [limit:V]'")
        src = cfg.parse_int(toks[0], where)
        dst = cfg.parse_int(toks[1], where)
        limit = 10.0
        for tok in toks[2:]:
            fields = cfg.parse_fields(tok, where, optional=("limit",))
            if "limit" in fields:
                limit = cfg.parse_float(fields["limit"], where)
        for nid in (src, dst):
            if nid not in nodes:
                raise cfg.ConfigError(f"{where}: edge references missing node {nid}")
        length = float(
            np.hypot(
                nodes[dst].pos[0] - nodes[src].pos[0],
                nodes[dst].pos[1] - nodes[src].pos[1],
            )
        )
        if length <= 0:
            raise cfg.ConfigError(f"{where}: zero-length edge {src}->{dst}")
        if limit <= 0:
            raise cfg.ConfigError(f"{where}: edge speed limit must be positive")
        eid = len(edges) + 1
        edges[eid] = RoadEdge(eid, src, dst, limit, length)
        out_edges[src].append(eid)

    entry_ids = []
    edge_by_pair = {(e.src, e.dst): e.id for e in edges.values()}
    for val, lineno in d.get("entry", []):
        where = f"{source}:{lineno}"
        pair = tuple(cfg.parse_ints(val, where))
        if len(pair) != 2 or pair not in edge_by_pair:
            raise cfg.ConfigError(f"{where}: entry must name an existing edge 'src dst'")
        entry_ids.append(edge_by_pair[pair])
    if not entry_ids:
        raise cfg.ConfigError(f"{source}: at least one 'entry' edge is required")

    name = d["name"][0] if "name" in d else name_hint
    graph = RoadGraph(name=name, nodes=nodes, edges=edges,
                      out_edges=dict(out_edges), entries=entry_ids)
    _validate_graph(graph, source)
    return graph


def _validate_graph(graph, source):
    for entry in graph.entries:
        seen = set()
        stack = [graph.edges[entry].src, graph.edges[entry].dst]
        while stack:
            nid = stack.pop()
            if nid in seen:
                continue
            seen.add(nid)
            for eid in graph.out_edges.get(nid, []):
                stack.append(graph.edges[eid].dst)
        missing = sorted(set(graph.nodes) - seen)
        if missing:
            raise cfg.ConfigError(
                f"{source}: nodes {missing} unreachable from entry edge "
                f"{graph.edges[entry].src}->{graph.edges[entry].dst}"
            )


_SQUARE_ROAD = """
name = square
node = 1 turn 4,2.2
node = 2 parking 20,2.2 cap:2
node = 3 ped_stop 36,2.2
node = 4 turn 52,2.2
node = 5 turn 52,4.2
node = 6 turn 4,4.2
edge = 1 2 limit:10
edge = 2 3 limit:10
edge = 3 4 limit:10
edge = 4 5 limit:6
edge = 5 6 limit:10
edge = 6 1 limit:6
entry = 1 2
"""

_JUNCTION_ROAD = """
name = junction
node = 1 turn 4,30
node = 2 ped_stop 30,30
node = 3 crossing 40,30
node = 4 turn 76,30
node = 5 turn 40,4
node = 6 parking 40,44 cap:2
node = 7 turn 40,56
edge = 1 2 limit:10
edge = 2 3 limit:10
edge = 3 4 limit:12
edge = 4 3 limit:12
edge = 3 1 limit:10
edge = 5 3 limit:10
edge = 3 5 limit:10
edge = 3 6 limit:8
edge = 6 7 limit:8
edge = 7 3 limit:10
entry = 1 2
entry = 4 3
entry = 5 3
"""

BUILTIN_ROADS = {
    "square": _SQUARE_ROAD,
    "junction": _JUNCTION_ROAD,
}


def build_road_graph(spec):
    """Build a validated RoadGraph from a built-in name or a spec file."""
    if spec in BUILTIN_ROADS:
        entries = cfg.parse_kv_lines(BUILTIN_ROADS[spec], source=f"<builtin:{spec}>")
        return _parse_road(entries, f"<builtin:{spec}>", spec)
    if os.path.exists(str(spec)):
        entries = cfg.read_kv_file(spec)
        name_hint = os.path.splitext(os.path.basename(str(spec)))[0]
        return _parse_road(entries, str(spec), name_hint)
    raise cfg.ConfigError(
        f"unknown road graph {spec!r} (built-ins: {', '.join(sorted(BUILTIN_ROADS))})"
    )


def build_road_graph_from_text(text, source="<road>", name_hint="custom"):
    entries = cfg.parse_kv_lines(text, source=source)
    return _parse_road(entries, source, name_hint)


def choose_exit(graph, node_id, came_from, rng):
    """Uniform draw over outgoing edges, excluding U-turns when possible."""
    out = graph.out_edges.get(node_id, [])
    if not out:
        raise RuntimeError(f"node {node_id} has no outgoing edges")
    pool = [eid for eid in out if graph.edges[eid].dst != came_from]
    if not pool:
        pool = out
    return pool[int(rng.integers(len(pool)))]


def parked_counts(cars):
    counts = defaultdict(int)
    for car in cars:
        if car.mode == PARKED:
            counts[car.bay_node] += 1
    return counts


def spawn_car(graph, cars, next_id, params):
    """Try to add one car on the first entry edge with room at its start."""
    for entry in graph.entries:
        occupied = [c.s for c in cars if c.mode != PARKED and c.edge == entry]
        if occupied and min(occupied) < params.min_gap + CAR_LENGTH:
            continue
        limit = graph.edges[entry].limit
        cars.append(CarState(id=next_id, edge=entry, s=0.0, speed=limit,
                             prev_node=graph.edges[entry].src))
        return True
    return False


def _target_speed(graph, car, ped_positions, params):
    edge = graph.edges[car.edge]
    dst = graph.nodes[edge.dst]
    speed = edge.limit
    to_node = edge.length - car.s
    if dst.kind in ("turn", "crossing") and to_node <= params.slow_distance:
        speed = params.slow_factor * edge.limit
    return speed


def _ped_stop_blocked(graph, node, ped_positions, params):
    if node.kind != "ped_stop" or len(ped_positions) == 0:
        return False
    d = np.linalg.norm(ped_positions - np.asarray(node.pos), axis=1)
    return bool((d <= params.ped_stop_radius).any())


def step_cars(graph, cars, ped_positions, dt, rng, params=None, time_s=0.0):
    """Advance all cars by one step; mutates and returns the car list.

    Cars are processed per edge in descending arc-length order so followers
    brake against their leader's updated position (no passing).
    """
    if params is None:
        params = TrafficParams()
    ped_positions = np.atleast_2d(np.asarray(ped_positions, dtype=float)) \
        if len(ped_positions) else np.zeros((0, 2))

    bays = parked_counts(cars)

    # resume parked cars whose dwell expired and whose exit edge is clear
    for car in sorted(cars, key=lambda c: c.id):
        if car.mode != PARKED or time_s < car.dwell_until:
            continue
        node_id = graph.edges[car.edge].dst
        exit_edge = choose_exit(graph, node_id, car.prev_node, rng)
        ahead = [c.s for c in cars if c.mode != PARKED and c.edge == exit_edge]
        if ahead and min(ahead) < params.min_gap + CAR_LENGTH:
            continue  # blocked; retry next step
        bays[car.bay_node] -= 1
        car.mode = DRIVING
        car.prev_node = node_id
        car.edge = exit_edge
        car.s = 0.0
        car.speed = 0.0
        car.bay_node = None

    by_edge = defaultdict(list)
    for car in cars:
        if car.mode != PARKED:
            by_edge[car.edge].append(car)

    for edge_id in sorted(by_edge):
        edge = graph.edges[edge_id]
        dst = graph.nodes[edge.dst]
        ped_blocked = _ped_stop_blocked(graph, dst, ped_positions, params)
        stop_line = edge.length - params.stop_margin
        column = sorted(by_edge[edge_id], key=lambda c: (-c.s, c.id))
        leader_limit = np.inf  # updated position of the car ahead on this edge
        for car in column:
            v = _target_speed(graph, car, ped_positions, params)
            new_s = car.s + v * dt
            yielding = False

            if ped_blocked:
                # hold at the stop line while any pedestrian is near the node
                new_s = car.s if car.s >= stop_line else min(new_s, stop_line)
                yielding = new_s >= stop_line - 1e-9

            if leader_limit < np.inf:
                new_s = max(min(new_s, leader_limit - params.min_gap), car.s)

            if new_s >= edge.length and not yielding:
                overshoot = new_s - edge.length
                if (dst.kind == "parking"
                        and bays.get(dst.id, 0) < dst.capacity
                        and rng.random() < params.park_prob):
                    car.mode = PARKED
                    car.s = edge.length
                    car.speed = 0.0
                    car.bay_node = dst.id
                    car.bay_index = bays.get(dst.id, 0)
                    car.dwell_until = time_s + rng.uniform(*params.park_dwell_range)
                    bays[dst.id] = bays.get(dst.id, 0) + 1
                    leader_limit = car.s
                    continue
                exit_edge = choose_exit(graph, dst.id, edge.src, rng)
                nxt = graph.edges[exit_edge]
                entering = [c.s for c in cars
                            if c.mode != PARKED and c is not car and c.edge == exit_edge]
                if entering and min(entering) < params.min_gap + CAR_LENGTH:
                    # hold at the node until the next edge has room
                    car.s = edge.length
                    car.speed = 0.0
                    leader_limit = car.s
                    continue
                car.prev_node = edge.src
                car.edge = exit_edge
                car.s = min(overshoot, nxt.length)
                car.speed = min(v, nxt.limit)
                car.mode = DRIVING
                leader_limit = np.inf  # car left this edge; no constraint remains
                continue

            new_s = min(new_s, edge.length)
            car.speed = max(0.0, (new_s - car.s) / dt)
            car.s = new_s
            car.mode = YIELDING if (yielding and car.speed <= 1e-9) else DRIVING
            leader_limit = car.s
    return cars


def car_world_box(graph, car):
    """World AABB of a car's oriented footprint (cars sit on the ground)."""
    if car.mode == PARKED:
        edge = graph.edges[car.edge]
        node = graph.nodes[edge.dst]
        u = graph.edge_dir(car.edge)
        perp = np.array([-u[1], u[0]])
        center = np.asarray(node.pos) + perp * (2.0 + 2.5 * car.bay_index)
    else:
        center = graph.edge_point(car.edge, car.s)
        u = graph.edge_dir(car.edge)
        perp = np.array([-u[1], u[0]])
    half = np.abs(u) * (CAR_LENGTH / 2) + np.abs(perp) * (CAR_WIDTH / 2)
    lo = (center[0] - half[0], center[1] - half[1], 0.0)
    hi = (center[0] + half[0], center[1] + half[1], CAR_HEIGHT)
    return lo, hi


def car_world_boxes(graph, cars):
    """Stable (object_id, lo, hi) triplets for every car, id order."""
    out = []
    for car in sorted(cars, key=lambda c: c.id):
        lo, hi = car_world_box(graph, car)
        out.append((CAR_ID_BASE + car.id, lo, hi))
    return out
