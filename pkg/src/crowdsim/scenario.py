"""One generation run: simulate a place, observe it with 1-3 cameras, and
write one MOT sequence directory per camera (gt + weather-noised det).

Determinism: all randomness flows from the scenario seed through named
SeedSequence streams: [seed, 0] drives the crowd, [seed, 2] the cars, and
[seed, 1, camera, frame] the per-frame detection channel, so sequences are
byte-identical across runs and processes.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numpy as np

from . import config as cfg
from . import traffic
from .agents import SimState, spawn_agents, step_agents
from .motio import SequenceMeta, write_sequence
from .sensor import capture_frame, get_weather, synthesize_detections
from .world import build_world, parse_camera_line

MAX_CAMERAS = 3


@dataclass
class ScenarioConfig:
    place: str
    n_pedestrians: int
    weather: object            # WeatherModel
    seed: int
    out_dir: str
    cameras: object = 1        # int (use the place's poses) or list of Camera
    enable_cars: bool = False
    duration_s: float = 30.0
    fps: int = 25
    min_area: float = 0.0
    p_ignore: float = None     # zone ignore probability override
    traffic_params: traffic.TrafficParams = field(default_factory=traffic.TrafficParams)

    def __post_init__(self):
        if self.n_pedestrians < 1:
            raise cfg.ConfigError("n_pedestrians must be >= 1")
        if self.n_pedestrians > 1000:
            raise cfg.ConfigError("n_pedestrians must be <= 1000")
        steps = self.duration_s * self.fps
        if abs(steps - round(steps)) > 1e-9:
            raise cfg.ConfigError("duration_s * fps must be an integer frame count")
        if isinstance(self.cameras, int) and not (1 <= self.cameras <= MAX_CAMERAS):
            raise cfg.ConfigError(f"cameras must be 1..{MAX_CAMERAS}")

    @property
    def n_frames(self):
        return int(round(self.duration_s * self.fps))


_WEATHER_OVERRIDE_KEYS = ("base_miss", "jitter_std", "fp_rate", "fog_beta")


def load_scenario_config(path):
    entries = cfg.read_kv_file(path)
    return scenario_config_from_entries(entries, str(path))


def scenario_config_from_text(text, source="<scenario>"):
    return scenario_config_from_entries(cfg.parse_kv_lines(text, source), source)


def scenario_config_from_entries(entries, source):
    d = cfg.entries_to_dict(entries, repeatable=("camera",), source=source)

    def need(key):
        if key not in d:
            raise cfg.ConfigError(f"{source}: missing required key {key!r}")
        return d[key]

    def where(lineno):
        return f"{source}:{lineno}"

    place = need("place")[0]
    n_val, n_line = need("n_pedestrians")
    n = cfg.parse_int(n_val, where(n_line))
    w_val, w_line = need("weather")
    overrides = {}
    for key in _WEATHER_OVERRIDE_KEYS:
        if key in d:
            val, lineno = d[key]
            overrides[key] = math.inf if val.strip() == "inf" else cfg.parse_float(val, where(lineno))
    try:
        weather = get_weather(w_val, **overrides)
    except ValueError as exc:
        raise cfg.ConfigError(f"{where(w_line)}: {exc}") from None
    seed_val, seed_line = need("seed")
    seed = cfg.parse_int(seed_val, where(seed_line))
    out_dir = need("out_dir")[0]

    if "camera" in d:
        cameras = [parse_camera_line(v, where(ln)) for v, ln in d["camera"]]
        if not (1 <= len(cameras) <= MAX_CAMERAS):
            raise cfg.ConfigError(f"{source}: 1..{MAX_CAMERAS} camera lines allowed")
    elif "cameras" in d:
        val, lineno = d["cameras"]
        cameras = cfg.parse_int(val, where(lineno))
    else:
        cameras = 1

    kwargs = {}
    if "enable_cars" in d:
        val, lineno = d["enable_cars"]
        kwargs["enable_cars"] = cfg.parse_bool(val, where(lineno))
    for key, parser in (("duration_s", cfg.parse_float), ("fps", cfg.parse_int),
                        ("min_area", cfg.parse_float), ("p_ignore", cfg.parse_float)):
        if key in d:
            val, lineno = d[key]
            kwargs[key] = parser(val, where(lineno))

    tp = traffic.TrafficParams()
    for key, attr, parser in (
        ("car_spawn_period_s", "spawn_period_s", cfg.parse_float),
        ("park_prob", "park_prob", cfg.parse_float),
    ):
        if key in d:
            val, lineno = d[key]
            setattr(tp, attr, parser(val, where(lineno)))
    if "park_dwell" in d:
        val, lineno = d["park_dwell"]
        lohi = cfg.parse_floats(val, where(lineno))
        if len(lohi) != 2:
            raise cfg.ConfigError(f"{where(lineno)}: park_dwell needs 'min max'")
        tp.park_dwell_range = tuple(lohi)

    return ScenarioConfig(place=place, n_pedestrians=n, weather=weather, seed=seed,
                          out_dir=out_dir, cameras=cameras, traffic_params=tp, **kwargs)


def sequence_dir_name(cfg_, cam_index):
    return (f"{cfg_.place}-{cfg_.weather.name}-n{cfg_.n_pedestrians}"
            f"-s{cfg_.seed}-cam{cam_index + 1}")


def run_scenario(cfg_):
    """Simulate and write one MOT sequence directory per camera.

    Returns the list of sequence directory paths (camera order).
    """
    world = build_world(cfg_.place)
    if cfg_.p_ignore is not None:
        for zone in world.zones:
            zone.p_ignore = cfg_.p_ignore

    if isinstance(cfg_.cameras, int):
        if len(world.cameras) < cfg_.cameras:
            raise cfg.ConfigError(
                f"place {world.name!r} ships {len(world.cameras)} camera poses, "
                f"{cfg_.cameras} requested"
            )
        cameras = world.cameras[: cfg_.cameras]
    else:
        cameras = list(cfg_.cameras)

    graph = None
    cars = []
    car_rng = None
    if cfg_.enable_cars:
        if cfg_.place not in traffic.BUILTIN_ROADS:
            raise cfg.ConfigError(
                f"place {cfg_.place!r} has no road graph; disable cars or pick one of "
                f"{', '.join(sorted(traffic.BUILTIN_ROADS))}"
            )
        graph = traffic.build_road_graph(cfg_.place)
        car_rng = np.random.default_rng(np.random.SeedSequence([cfg_.seed, 2]))

    sim_rng = np.random.default_rng(np.random.SeedSequence([cfg_.seed, 0]))
    agents = spawn_agents(world, cfg_.n_pedestrians, sim_rng)
    state = SimState(agents=agents, rng=sim_rng, fps=cfg_.fps)

    dt = 1.0 / cfg_.fps
    spawn_every = max(1, int(round(cfg_.traffic_params.spawn_period_s * cfg_.fps)))
    next_car_id = 1
    gt_per_camera = [[] for _ in cameras]

    for frame in range(1, cfg_.n_frames + 1):
        step_agents(world, state, dt)
        if graph is not None:
            if (frame - 1) % spawn_every == 0:
                if traffic.spawn_car(graph, cars, next_car_id, cfg_.traffic_params):
                    next_car_id += 1
            ped_pos = np.array([a.position for a in state.agents])
            traffic.step_cars(graph, cars, ped_pos, dt, car_rng,
                              cfg_.traffic_params, time_s=state.time_s)
        car_boxes = traffic.car_world_boxes(graph, cars) if graph is not None else ()
        for ci, camera in enumerate(cameras):
            gt_per_camera[ci].extend(
                capture_frame(camera, state.agents, car_boxes, frame, cfg_.min_area)
            )

    seq_dirs = []
    for ci, camera in enumerate(cameras):
        dets = []
        by_frame = {}
        for e in gt_per_camera[ci]:
            by_frame.setdefault(e.frame, []).append(e)
        for frame in range(1, cfg_.n_frames + 1):
            det_rng = np.random.default_rng(
                np.random.SeedSequence([cfg_.seed, 1, ci, frame])
            )
            dets.extend(
                synthesize_detections(
                    by_frame.get(frame, []), cfg_.weather, det_rng, frame=frame,
                    image_size=(camera.width, camera.height),
                )
            )
        seq_dir = os.path.join(cfg_.out_dir, sequence_dir_name(cfg_, ci))
        meta = SequenceMeta(name=sequence_dir_name(cfg_, ci),
                            seq_length=cfg_.n_frames, frame_rate=cfg_.fps,
                            im_width=camera.width, im_height=camera.height)
        write_sequence(seq_dir, meta, gt_per_camera[ci], dets)
        seq_dirs.append(seq_dir)
    return seq_dirs
