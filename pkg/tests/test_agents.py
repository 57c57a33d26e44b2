import numpy as np
import pytest

from crowdsim.agents import (DONE, INTERACTING, QUEUED, WALKING, AgentState,
                             SimState, spawn_agents, step_agents, update_zone)
from crowdsim.geometry import clearance
from crowdsim.world import Zone, build_world, build_world_from_text

from conftest import OPEN_WORLD, WALLED_WORLD

DT = 0.04


def sim_rng(seed):
    return np.random.default_rng(np.random.SeedSequence([seed, 0]))


def make_agent(aid, pos, vel=(0.0, 0.0), speed=1.4, radius=0.25, path=None):
    return AgentState(id=aid, position=np.array(pos, dtype=float),
                      velocity=np.array(vel, dtype=float), preferred_speed=speed,
                      radius=radius, height=1.7, path=list(path or []), goal=None)


def snapshot(state):
    return [(a.position.copy(), a.velocity.copy(), a.mode) for a in state.agents]


class TestSpawn:
    def test_single_agent_walks_with_path(self):
        w = build_world_from_text(OPEN_WORLD)
        agents = spawn_agents(w, 1, sim_rng(1))
        assert len(agents) == 1
        assert agents[0].mode == WALKING
        assert agents[0].path and agents[0].goal in w.goal_points

    def test_spawn_is_deterministic(self):
        w = build_world("square")
        a = spawn_agents(w, 160, sim_rng(7))
        b = spawn_agents(build_world("square"), 160, sim_rng(7))
        for x, y in zip(a, b):
            assert np.array_equal(x.position, y.position)
            assert np.array_equal(x.velocity, y.velocity)
            assert x.preferred_speed == y.preferred_speed
            assert x.height == y.height and x.radius == y.radius
            assert x.path == y.path and x.goal == y.goal

    def test_speed_height_radius_ranges(self):
        w = build_world("square")
        agents = spawn_agents(w, 160, sim_rng(3))
        for a in agents:
            assert 0.8 <= a.preferred_speed <= 2.0
            assert 1.5 <= a.height <= 1.9
            assert 0.2 <= a.radius <= 0.3

    def test_bad_counts_raise(self):
        w = build_world("square")
        with pytest.raises(ValueError):
            spawn_agents(w, 0, sim_rng(1))
        with pytest.raises(ValueError):
            spawn_agents(w, 1001, sim_rng(1))


class TestStep:
    def test_idle_agent_stays_put(self):
        w = build_world_from_text(OPEN_WORLD)
        agent = make_agent(1, (10.0, 10.0))
        agent.path = []
        agent.goal = None
        agent.mode = DONE  # no goal cycling
        state = SimState(agents=[agent], rng=sim_rng(1))
        step_agents(w, state, DT)
        assert np.array_equal(agent.position, np.array([10.0, 10.0]))

    def test_straight_line_speed_is_exact(self):
        w = build_world_from_text(OPEN_WORLD)
        agent = make_agent(1, (2.0, 10.0), vel=(1.4, 0.0), speed=1.4,
                           path=[(25.0, 10.0)])
        agent.goal = (25.0, 10.0)
        state = SimState(agents=[agent], rng=sim_rng(1))
        for k in range(1, 101):
            prev = agent.position.copy()
            step_agents(w, state, DT)
            step = np.linalg.norm(agent.position - prev)
            assert abs(step - 1.4 * DT) < 1e-9, k

    def test_head_on_agents_never_overlap(self):
        w = build_world_from_text(OPEN_WORLD)
        a = make_agent(1, (5.0, 10.0), vel=(1.4, 0.0), path=[(25.0, 10.0)])
        b = make_agent(2, (25.0, 10.0), vel=(-1.4, 0.0), path=[(5.0, 10.0)])
        a.goal = (25.0, 10.0)
        b.goal = (5.0, 10.0)
        state = SimState(agents=[a, b], rng=sim_rng(1))
        min_dist = np.inf
        for _ in range(400):
            step_agents(w, state, DT)
            min_dist = min(min_dist, float(np.linalg.norm(a.position - b.position)))
        assert min_dist >= a.radius + b.radius

    def test_speed_cap_holds(self):
        w = build_world("square")
        state = SimState(agents=spawn_agents(w, 40, sim_rng(5)), rng=sim_rng(5))
        for _ in range(200):
            step_agents(w, state, DT)
            for a in state.agents:
                assert np.linalg.norm(a.velocity) <= 2.0 + 1e-9

    def test_obstacle_clearance_holds(self):
        w = build_world_from_text(WALLED_WORLD)
        state = SimState(agents=spawn_agents(w, 10, sim_rng(2)), rng=sim_rng(2))
        for _ in range(500):
            step_agents(w, state, DT)
            pos = np.array([a.position for a in state.agents])
            radii = np.array([a.radius for a in state.agents])
            for poly in w.obstacles:
                signed, _ = clearance(poly, pos)
                assert (signed >= radii - 1e-6).all()

    def test_time_bookkeeping_is_exact(self):
        w = build_world_from_text(OPEN_WORLD)
        state = SimState(agents=spawn_agents(w, 2, sim_rng(1)), rng=sim_rng(1))
        for k in range(1, 101):
            step_agents(w, state, DT)
            assert state.time_s == k / 25

    def test_determinism_same_process(self):
        w1 = build_world("square")
        s1 = SimState(agents=spawn_agents(w1, 30, sim_rng(9)), rng=sim_rng(9))
        w2 = build_world("square")
        s2 = SimState(agents=spawn_agents(w2, 30, sim_rng(9)), rng=sim_rng(9))
        for _ in range(150):
            step_agents(w1, s1, DT)
            step_agents(w2, s2, DT)
        for a, b in zip(s1.agents, s2.agents):
            assert np.array_equal(a.position, b.position)
            assert np.array_equal(a.velocity, b.velocity)
            assert a.mode == b.mode


def make_zone(center=(10.0, 10.0), radius=2.0, required=2, duration=5.0,
              leave=4.0, p_ignore=0.0):
    return Zone(center=center, radius=radius, kind="dance",
                required_agents=required, duration_s=duration,
                leave_radius=leave, p_ignore=p_ignore)


class TestZones:
    def test_first_agent_is_enqueued(self):
        zone = make_zone()
        a = make_agent(1, (10.5, 10.0))
        events = update_zone(zone, 0, [a], 0.0, sim_rng(1))
        assert ("enqueued", 1) in events
        assert zone.queue == [1] and a.mode == QUEUED

    def test_second_agent_starts_interaction(self):
        zone = make_zone()
        a = make_agent(1, (10.5, 10.0))
        b = make_agent(2, (9.5, 10.0))
        update_zone(zone, 0, [a, b], 0.0, sim_rng(1))
        assert zone.active == [1, 2] and zone.queue == []
        assert a.mode == INTERACTING and b.mode == INTERACTING

    def test_queued_agent_leaving_is_dequeued(self):
        zone = make_zone(required=3)
        a = make_agent(1, (10.5, 10.0))
        update_zone(zone, 0, [a], 0.0, sim_rng(1))
        assert zone.queue == [1]
        a.position = np.array([20.0, 10.0])  # beyond leave radius
        events = update_zone(zone, 0, [a], 0.04, sim_rng(1))
        assert ("dequeued", 1) in events
        assert zone.queue == [] and a.mode == WALKING

    def test_ignore_probability_and_cooldown(self):
        zone = make_zone(p_ignore=1.0)
        a = make_agent(1, (10.5, 10.0))
        events = update_zone(zone, 0, [a], 0.0, sim_rng(1))
        assert ("ignored", 1) in events and a.mode == WALKING
        # still inside the cooldown window: no more events
        assert update_zone(zone, 0, [a], 10.0, sim_rng(1)) == []

    def test_interaction_finishes_after_duration(self):
        zone = make_zone(duration=5.0)
        a = make_agent(1, (10.5, 10.0))
        b = make_agent(2, (9.5, 10.0))
        update_zone(zone, 0, [a, b], 0.0, sim_rng(1))
        update_zone(zone, 0, [a, b], 4.96, sim_rng(1))
        assert zone.active == [1, 2]
        events = update_zone(zone, 0, [a, b], 5.0, sim_rng(1))
        assert ("finish", 1) in events and ("finish", 2) in events
        assert a.mode == WALKING and zone.active == []

    def test_active_size_equals_required(self):
        zone = make_zone(required=2)
        agents = [make_agent(i, (10.0 + 0.1 * i, 10.0)) for i in range(1, 4)]
        update_zone(zone, 0, agents, 0.0, sim_rng(1))
        assert len(zone.active) == 2 and zone.queue == [3]

    def test_zone_exclusivity_in_simulation(self):
        w = build_world("square")
        for z in w.zones:
            z.p_ignore = 0.0  # maximize churn
        state = SimState(agents=spawn_agents(w, 40, sim_rng(11)), rng=sim_rng(11))
        for _ in range(400):
            step_agents(w, state, DT)
            seen = {}
            for zi, z in enumerate(w.zones):
                assert set(z.queue).isdisjoint(z.active)
                assert len(z.active) in (0, z.required_agents)
                for aid in list(z.queue) + list(z.active):
                    assert aid not in seen, f"agent {aid} in two zones"
                    seen[aid] = zi
