"""crowdsim: deterministic crowd/traffic simulation to MOT Challenge datasets,
classical trackers, and CLEAR-MOT evaluation."""

__version__ = "0.1.0"

from .boxes import Box, iou
from .camera import Camera, project_box
from .metrics import MetricsReport, evaluate_sequence, match_frame, aggregate
from .motio import SequenceMeta, read_sequence, write_sequence
from .scenario import ScenarioConfig, run_scenario
from .sensor import (Detection, GtEntry, WeatherModel, capture_frame,
                     compute_visibility, get_weather, perturb_detections,
                     synthesize_detections)
from .sweep import SweepConfig, run_sweep
from .tracking import (IouTrackerParams, SortParams, Track, kalman_init,
                       kalman_step, solve_assignment, track_iou, track_sort)
from .traffic import RoadGraph, build_road_graph, choose_exit, step_cars
from .world import World, Zone, build_world
from .agents import AgentState, SimState, spawn_agents, step_agents, update_zone
from .pathfinding import plan_path

__all__ = [
    "Box", "iou", "Camera", "project_box", "MetricsReport", "evaluate_sequence",
    "match_frame", "aggregate", "SequenceMeta", "read_sequence", "write_sequence",
    "ScenarioConfig", "run_scenario", "Detection", "GtEntry", "WeatherModel",
    "capture_frame", "compute_visibility", "get_weather", "perturb_detections",
    "synthesize_detections", "SweepConfig", "run_sweep", "IouTrackerParams",
    "SortParams", "Track", "kalman_init", "kalman_step", "solve_assignment",
    "track_iou", "track_sort", "RoadGraph", "build_road_graph", "choose_exit",
    "step_cars", "World", "Zone", "build_world", "AgentState", "SimState",
    "spawn_agents", "step_agents", "update_zone", "plan_path",
]
