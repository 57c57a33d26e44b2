"""Parameter sweeps: the Cartesian product of places x weathers x densities x
seeds, tracked with every requested tracker and folded into one results CSV.

Cells are independent (each owns its scenario seed and output directory), so
they run concurrently and a sweep can resume: rows already present in the
results CSV are kept verbatim and their cells skipped.  The final CSV is
rewritten in canonical factor order, making completed sweeps byte-identical
regardless of scheduling or interruptions.
"""

from __future__ import annotations

import csv
import os
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from . import config as cfg
from . import traffic
from .metrics import evaluate_sequence
from .motio import read_det_file, read_gt_file, read_seqinfo, write_hypothesis_file
from .scenario import ScenarioConfig, run_scenario
from .sensor import get_weather
from .tracking import (IouTrackerParams, SortParams, group_detections_by_frame,
                       track_iou, track_sort)

THREADS_ENV = "CROWDSIM_THREADS"
TRACKER_NAMES = ("iou", "sort")

RESULT_COLUMNS = [
    "place", "weather", "density", "realized_density", "seed", "camera",
    "tracker", "mota", "idsw", "fp", "fn", "error",
]


@dataclass
class SweepConfig:
    densities: list
    weathers: list
    seeds: list
    places: list
    trackers: list
    out_dir: str
    cameras: int = 1
    duration_s: float = 30.0
    fps: int = 25
    enable_cars: bool = False
    min_area: float = 0.0
    threads: int = None

    def __post_init__(self):
        for name, values in (("densities", self.densities), ("weathers", self.weathers),
                             ("seeds", self.seeds), ("places", self.places),
                             ("trackers", self.trackers)):
            if not values:
                raise cfg.ConfigError(f"sweep {name} must be a non-empty list")
        for t in self.trackers:
            if t not in TRACKER_NAMES:
                raise cfg.ConfigError(f"unknown tracker {t!r} (choices: iou, sort)")


def load_sweep_config(path):
    entries = cfg.read_kv_file(path)
    return sweep_config_from_entries(entries, str(path))


def sweep_config_from_text(text, source="<sweep>"):
    return sweep_config_from_entries(cfg.parse_kv_lines(text, source), source)


def sweep_config_from_entries(entries, source):
    d = cfg.entries_to_dict(entries, source=source)

    def need(key):
        if key not in d:
            raise cfg.ConfigError(f"{source}: missing required key {key!r}")
        return d[key]

    def where(lineno):
        return f"{source}:{lineno}"

    dens_val, dens_line = need("densities")
    weathers_val, _ = need("weathers")
    seeds_val, seeds_line = need("seeds")
    places_val, _ = need("places")
    trackers_val, _ = need("trackers")
    kwargs = {}
    for key, parser in (("cameras", cfg.parse_int), ("duration_s", cfg.parse_float),
                        ("fps", cfg.parse_int), ("min_area", cfg.parse_float),
                        ("threads", cfg.parse_int)):
        if key in d:
            val, lineno = d[key]
            kwargs[key] = parser(val, where(lineno))
    if "enable_cars" in d:
        val, lineno = d["enable_cars"]
        kwargs["enable_cars"] = cfg.parse_bool(val, where(lineno))
    return SweepConfig(
        densities=cfg.parse_ints(dens_val, where(dens_line)),
        weathers=cfg.parse_names(weathers_val),
        seeds=cfg.parse_ints(seeds_val, where(seeds_line)),
        places=cfg.parse_names(places_val),
        trackers=cfg.parse_names(trackers_val),
        out_dir=need("out_dir")[0],
        **kwargs,
    )


TRACKER_RUNNERS = {
    "iou": lambda dets, n: track_iou(group_detections_by_frame(dets),
                                     IouTrackerParams(), n_frames=n),
    "sort": lambda dets, n: track_sort(group_detections_by_frame(dets),
                                       SortParams(), n_frames=n),
}


def run_tracker(name, detections, n_frames=None):
    if name not in TRACKER_RUNNERS:
        raise cfg.ConfigError(f"unknown tracker {name!r}")
    return TRACKER_RUNNERS[name](detections, n_frames)


def _cells(sweep):
    for place in sweep.places:
        for weather in sweep.weathers:
            for density in sweep.densities:
                for seed in sweep.seeds:
                    yield (place, weather, density, seed)


def _row_keys(sweep):
    for place, weather, density, seed in _cells(sweep):
        for camera in range(1, sweep.cameras + 1):
            for tracker in sweep.trackers:
                yield (place, weather, str(density), str(seed), str(camera), tracker)


def _key_of_row(row):
    return (row["place"], row["weather"], row["density"], row["seed"],
            row["camera"], row["tracker"])


def _run_cell(sweep, cell):
    """Generate one cell and evaluate every camera x tracker combination."""
    place, weather, density, seed = cell
    rows = []
    try:
        scenario = ScenarioConfig(
            place=place, n_pedestrians=density, weather=get_weather(weather),
            seed=seed, out_dir=os.path.join(sweep.out_dir, "sequences"),
            cameras=sweep.cameras, duration_s=sweep.duration_s, fps=sweep.fps,
            enable_cars=sweep.enable_cars, min_area=sweep.min_area,
        )
        seq_dirs = run_scenario(scenario)
    except Exception as exc:  # cell failures land in the error column
        msg = f"{type(exc).__name__}: {exc}"
        for camera in range(1, sweep.cameras + 1):
            for tracker in sweep.trackers:
                rows.append(_error_row(cell, camera, tracker, msg))
        return rows

    for camera, seq_dir in enumerate(seq_dirs, start=1):
        try:
            meta = read_seqinfo(os.path.join(seq_dir, "seqinfo.ini"))
            gt = read_gt_file(os.path.join(seq_dir, "gt", "gt.txt"))
            dets = read_det_file(os.path.join(seq_dir, "det", "det.txt"))
            realized = len(gt) / meta.seq_length
        except Exception as exc:
            msg = f"{type(exc).__name__}: {exc}"
            for tracker in sweep.trackers:
                rows.append(_error_row(cell, camera, tracker, msg))
            continue
        for tracker in sweep.trackers:
            try:
                tracks = run_tracker(tracker, dets, meta.seq_length)
                hyp_path = os.path.join(seq_dir, f"hyp_{tracker}.txt")
                write_hypothesis_file(hyp_path, tracks)
                hyp = read_gt_file(hyp_path)
                report = evaluate_sequence(gt, hyp)
                rows.append({
                    "place": place, "weather": weather, "density": str(density),
                    "realized_density": f"{realized:.3f}", "seed": str(seed),
                    "camera": str(camera), "tracker": tracker,
                    "mota": "na" if report.mota is None else f"{report.mota:.6f}",
                    "idsw": str(report.idsw), "fp": str(report.fp),
                    "fn": str(report.fn), "error": "",
                })
            except Exception as exc:
                rows.append(_error_row(cell, camera, tracker,
                                       f"{type(exc).__name__}: {exc}"))
    return rows


def _error_row(cell, camera, tracker, msg):
    place, weather, density, seed = cell
    return {
        "place": place, "weather": weather, "density": str(density),
        "realized_density": "", "seed": str(seed), "camera": str(camera),
        "tracker": tracker, "mota": "", "idsw": "", "fp": "", "fn": "",
        "error": msg.replace("\n", " "),
    }


def _read_existing_rows(path):
    rows = {}
    if not os.path.exists(path):
        return rows
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            if row.get("place") is None:
                continue
            rows[_key_of_row(row)] = row
    return rows


def effective_threads(requested=None):
    n = requested or os.cpu_count() or 1
    cap = os.environ.get(THREADS_ENV)
    if cap:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError:
            pass
    return max(1, n)


def run_sweep(sweep, progress=None):
    """Run (or resume) a sweep; returns the results CSV path."""
    os.makedirs(sweep.out_dir, exist_ok=True)
    results_path = os.path.join(sweep.out_dir, "results.csv")
    done = _read_existing_rows(results_path)

    pending = []
    for cell in _cells(sweep):
        place, weather, density, seed = cell
        keys = [(place, weather, str(density), str(seed), str(camera), tracker)
                for camera in range(1, sweep.cameras + 1)
                for tracker in sweep.trackers]
        if not all(k in done for k in keys):
            pending.append(cell)

    lock = threading.Lock()

    def worker(cell):
        rows = _run_cell(sweep, cell)
        with lock:
            for row in rows:
                done[_key_of_row(row)] = row
            _append_rows(results_path, rows)
        if progress is not None:
            progress(cell)
        return rows

    if pending:
        workers = effective_threads(sweep.threads)
        if workers == 1 or len(pending) == 1:
            for cell in pending:
                worker(cell)
        else:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                list(pool.map(worker, pending))

    # canonical rewrite: factor order from the config, byte-stable
    with open(results_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=RESULT_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for key in _row_keys(sweep):
            row = done.get(key)
            if row is not None:
                writer.writerow({col: row.get(col, "") for col in RESULT_COLUMNS})
    return results_path


def _append_rows(path, rows):
    new_file = not os.path.exists(path)
    with open(path, "a", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=RESULT_COLUMNS, lineterminator="\n")
        if new_file:
            writer.writeheader()
        for row in rows:
            writer.writerow(row)
