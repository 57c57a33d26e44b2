"""Pedestrian agents: spawning, steering, zone interactions.

Steering is relaxation toward the desired velocity plus exponential repulsion
from neighbors and obstacles; a hard position projection afterwards keeps
bodies out of obstacles and out of each other no matter what the forces did.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .pathfinding import plan_path
from .world import ZONE_IGNORE_COOLDOWN_S

# steering model constants
TAU = 0.5                 # velocity relaxation time, s
REPULSION_A = 2.0         # repulsion strength, m/s^2
REPULSION_B = 0.3         # repulsion range scale, m
NEIGHBOR_RADIUS = 2.0     # interaction cutoff, m
WAYPOINT_RADIUS = 0.3     # waypoint pop distance, m
MAX_SPEED = 2.0           # hard speed cap, m/s
SPAWN_JITTER = 0.3        # per-agent spawn offset, m

PATH_JITTER = 0.6         # lateral spread of grid paths per assignment, m

WALKING = "walking"
QUEUED = "queued"
INTERACTING = "interacting"
DONE = "done"


@dataclass
class AgentState:
    id: int
    position: np.ndarray
    velocity: np.ndarray
    preferred_speed: float
    radius: float
    height: float
    path: list            # remaining waypoints, (x, y) tuples
    goal: tuple
    mode: str = WALKING
    zone_index: int = None
    interact_until: float = 0.0
    interact_slot: tuple = None  # ring position held during an interaction


@dataclass
class SimState:
    agents: list
    rng: np.random.Generator
    fps: int = 25
    step_count: int = 0

    @property
    def time_s(self):
        # exact rational bookkeeping: k/fps, never accumulated floats
        return self.step_count / self.fps


def draw_goal(world, rng, exclude=None):
    """Uniform goal draw, excluding the current goal when possible."""
    goals = world.goal_points
    if exclude is not None and len(goals) > 1:
        goals = [g for g in goals if g != exclude]
    return goals[int(rng.integers(len(goals)))]


_GOLDEN_ANGLE = 2.399963229728653


def spawn_agents(world, n, rng):
    """Spawn n agents round-robin over spawn points with positional jitter.

    Agents revisiting an already-used spawn point are pushed out on a spiral
    (one body diameter per round) so nobody starts overlapped.  Deterministic
    for a fixed generator state.  Speeds are N(1.4, 0.2^2) clamped to
    [0.8, 2.0] m/s; heights U[1.5, 1.9] m; radii U[0.2, 0.3] m.
    """
    if n < 1:
        raise ValueError(f"agent count must be >= 1, got {n}")
    if n > 1000:
        raise ValueError(f"agent count must be <= 1000, got {n}")
    agents = []
    spawns = world.spawn_points
    xmin, ymin, xmax, ymax = world.bounds
    for i in range(n):
        base = spawns[i % len(spawns)]
        ring = i // len(spawns)
        jitter = rng.uniform(-SPAWN_JITTER, SPAWN_JITTER, 2)
        angle = _GOLDEN_ANGLE * i
        pos = np.array([
            base[0] + jitter[0] + 0.9 * ring * np.cos(angle),
            base[1] + jitter[1] + 0.9 * ring * np.sin(angle),
        ])
        pos[0] = min(max(pos[0], xmin + 0.5), xmax - 0.5)
        pos[1] = min(max(pos[1], ymin + 0.5), ymax - 0.5)
        speed = float(np.clip(rng.normal(1.4, 0.2), 0.8, 2.0))
        height = float(rng.uniform(1.5, 1.9))
        radius = float(rng.uniform(0.2, 0.3))
        agent = AgentState(
            id=i + 1, position=pos, velocity=np.zeros(2),
            preferred_speed=speed, radius=radius, height=height,
            path=[], goal=None,
        )
        _assign_goal(world, agent, rng)
        if agent.path:
            direction = np.asarray(agent.path[0]) - pos
            norm = np.linalg.norm(direction)
            if norm > 1e-9:
                # start already walking so unobstructed motion is exactly
                # preferred_speed from the first step
                agent.velocity = direction / norm * speed
        agents.append(agent)
    return agents


def _assign_goal(world, agent, rng, exclude=None):
    """Draw a reachable goal and plan to it; falls back to DONE mode."""
    first = draw_goal(world, rng, exclude=exclude)
    candidates = [first] + [g for g in world.goal_points if g != first]
    for goal in candidates:
        path = plan_path(world, tuple(agent.position), goal)
        if path is not None:
            agent.goal = goal
            agent.path = _jitter_path(world, path, rng)
            return True
    agent.goal = None
    agent.path = []
    agent.mode = DONE
    return False


def _jitter_path(world, path, rng):
    """Offset intermediate waypoints by a per-assignment lateral shift.

    Grid paths between the same endpoints are identical polylines, which
    funnels agents into single file; a small personal offset spreads them.
    Waypoints whose offset lands on a blocked cell keep their position.
    """
    if len(path) < 2:
        return list(path)
    delta = rng.uniform(-PATH_JITTER, PATH_JITTER, 2)
    out = []
    for wp in path[:-1]:
        cand = (wp[0] + delta[0], wp[1] + delta[1])
        cell = world.point_to_cell(cand)
        out.append(cand if not world.nav_grid[cell[1], cell[0]] else wp)
    out.append(path[-1])
    return out


def update_zone(zone, zone_index, agents, time_s, rng):
    """Advance one zone's queue/active state machine.

    Mutates the zone and agent modes; returns mode-change events as
    (label, agent_id) tuples.  Called once per step per zone.
    """
    events = []
    by_id = {a.id: a for a in agents}
    # finish an expired interaction
    if zone.active and time_s >= zone.active_until:
        for aid in zone.active:
            agent = by_id[aid]
            agent.mode = WALKING
            agent.zone_index = None
            agent.interact_slot = None
            agent.path = []  # pick a fresh goal after the interaction
            # done interacting: don't reconsider this zone immediately
            zone.ignore_until[aid] = time_s + ZONE_IGNORE_COOLDOWN_S
            events.append(("finish", aid))
        zone.active = []

    cx, cy = zone.center
    for agent in agents:
        d = float(np.hypot(agent.position[0] - cx, agent.position[1] - cy))
        if agent.id in zone.queue:
            if d > zone.leave_radius:
                zone.queue.remove(agent.id)
                agent.mode = WALKING
                agent.zone_index = None
                events.append(("dequeued", agent.id))
        elif agent.mode == WALKING and d <= zone.radius:
            if time_s < zone.ignore_until.get(agent.id, -1.0):
                continue
            if rng.random() < zone.p_ignore:
                zone.ignore_until[agent.id] = time_s + ZONE_IGNORE_COOLDOWN_S
                events.append(("ignored", agent.id))
            else:
                zone.queue.append(agent.id)
                agent.mode = QUEUED
                agent.zone_index = zone_index
                events.append(("enqueued", agent.id))

    if not zone.active and len(zone.queue) >= zone.required_agents:
        members = zone.queue[: zone.required_agents]
        zone.queue = zone.queue[zone.required_agents:]
        zone.active = members
        zone.active_until = time_s + zone.duration_s
        ring = min(1.3, 0.65 * zone.radius)
        for k, aid in enumerate(members):
            agent = by_id[aid]
            agent.mode = INTERACTING
            agent.zone_index = zone_index
            agent.interact_until = zone.active_until
            # face-to-face ring slots keep interacting bodies apart
            angle = 2.0 * np.pi * k / len(members)
            agent.interact_slot = (cx + ring * np.cos(angle), cy + ring * np.sin(angle))
            events.append(("start", aid))
    return events


def _desired_velocities(agents):
    n = len(agents)
    desired = np.zeros((n, 2))
    for i, agent in enumerate(agents):
        if agent.mode == INTERACTING and agent.interact_slot is not None:
            # hold the ring slot: proportional slow-in, no overshoot
            delta = np.asarray(agent.interact_slot) - agent.position
            dist = np.linalg.norm(delta)
            if dist > 0.05:
                speed = min(agent.preferred_speed, 2.0 * dist)
                desired[i] = delta / dist * speed
            continue
        if agent.mode in (INTERACTING, DONE) or not agent.path:
            continue
        target = np.asarray(agent.path[0], dtype=float)
        delta = target - agent.position
        dist = np.linalg.norm(delta)
        if dist > 1e-9:
            desired[i] = delta / dist * agent.preferred_speed
    return desired


SIDESTEP_FRACTION = 0.5  # tangential share of the pair repulsion


def _pair_repulsion(pos, radii, movable):
    """Radial repulsion plus a fixed-chirality tangential component.

    The tangential term makes agents slide around each other instead of
    pushing head-on, which breaks both symmetric deadlocks and single-file
    following locks (everybody sidesteps to the same relative side).
    """
    n = len(pos)
    force = np.zeros((n, 2))
    if n < 2:
        return force
    diff = pos[:, None, :] - pos[None, :, :]
    dist = np.linalg.norm(diff, axis=2)
    np.fill_diagonal(dist, np.inf)
    rsum = radii[:, None] + radii[None, :]
    mag = REPULSION_A * np.exp((rsum - dist) / REPULSION_B)
    mag[dist > NEIGHBOR_RADIUS] = 0.0
    safe = np.maximum(dist, 1e-9)
    radial = diff / safe[:, :, None]
    tangent = np.stack([radial[:, :, 1], -radial[:, :, 0]], axis=2)
    contrib = mag[:, :, None] * (radial + SIDESTEP_FRACTION * tangent)
    force = contrib.sum(axis=1)
    force[~movable] = 0.0
    return force


def _obstacle_repulsion(world, pos, radii, movable):
    from .geometry import clearance

    n = len(pos)
    force = np.zeros((n, 2))
    for poly in world.obstacles:
        signed, outward = clearance(poly, pos)
        mag = REPULSION_A * np.exp((radii - signed) / REPULSION_B)
        mag[signed > NEIGHBOR_RADIUS] = 0.0
        force += mag[:, None] * outward
    force[~movable] = 0.0
    return force


def _project_out_of_obstacles(world, pos, radii):
    from .geometry import clearance

    for _ in range(3):
        moved = False
        for poly in world.obstacles:
            signed, outward = clearance(poly, pos)
            bad = signed < radii
            if bad.any():
                push = (radii[bad] - signed[bad]) * (1.0 + 1e-9)
                pos[bad] += push[:, None] * outward[bad]
                moved = True
        if not moved:
            break
    return pos


def _separate_agents(pos, radii, movable):
    """Hard pairwise separation so center distance >= radius sum."""
    n = len(pos)
    if n < 2:
        return pos
    for _ in range(4):
        diff = pos[:, None, :] - pos[None, :, :]
        dist = np.linalg.norm(diff, axis=2)
        np.fill_diagonal(dist, np.inf)
        rsum = radii[:, None] + radii[None, :]
        ii, jj = np.nonzero(np.triu(dist < rsum, k=1))
        if len(ii) == 0:
            break
        for i, j in zip(ii, jj):
            d = np.linalg.norm(pos[i] - pos[j])
            need = (radii[i] + radii[j]) * (1.0 + 1e-9)
            if d >= need:
                continue
            direction = (pos[i] - pos[j]) / d if d > 1e-12 else np.array([1.0, 0.0])
            overlap = need - d
            wi = 0.5 if movable[i] and movable[j] else (1.0 if movable[i] else 0.0)
            pos[i] += direction * overlap * wi
            pos[j] -= direction * overlap * (1.0 - wi) if movable[j] else 0.0
    return pos


def step_agents(world, state, dt):
    """Advance every agent by one fixed time step; returns the state."""
    agents = state.agents
    time_s = state.time_s
    for zi, zone in enumerate(world.zones):
        update_zone(zone, zi, agents, time_s, state.rng)

    n = len(agents)
    if n:
        pos = np.array([a.position for a in agents])
        vel = np.array([a.velocity for a in agents])
        radii = np.array([a.radius for a in agents])
        movable = np.array([a.mode != DONE for a in agents])

        desired = _desired_velocities(agents)
        force = (desired - vel) / TAU
        force += _pair_repulsion(pos, radii, movable)
        force += _obstacle_repulsion(world, pos, radii, movable)

        vel = vel + force * dt
        speed = np.linalg.norm(vel, axis=1)
        over = speed > MAX_SPEED
        vel[over] *= (MAX_SPEED / speed[over])[:, None]
        vel[~movable] = 0.0
        pos = pos + vel * dt

        pos = _project_out_of_obstacles(world, pos, radii)
        pos = _separate_agents(pos, radii, movable)
        xmin, ymin, xmax, ymax = world.bounds
        pos[:, 0] = np.clip(pos[:, 0], xmin + radii, xmax - radii)
        pos[:, 1] = np.clip(pos[:, 1], ymin + radii, ymax - radii)

        for i, agent in enumerate(agents):
            agent.position = pos[i]
            agent.velocity = vel[i]

    # waypoint bookkeeping and goal cycling
    for agent in agents:
        if agent.mode in (INTERACTING, DONE):
            continue
        while agent.path and np.linalg.norm(
            np.asarray(agent.path[0]) - agent.position
        ) <= WAYPOINT_RADIUS:
            agent.path.pop(0)
        if not agent.path:
            _assign_goal(world, agent, state.rng, exclude=agent.goal)

    state.step_count += 1
    return state
