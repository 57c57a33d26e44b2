"""Command-line pipeline:

    crowdsim generate <scenario.cfg>
    crowdsim track <seq-dir> --tracker iou|sort [params]
    crowdsim evaluate <gt-dir> <hyp-file>
    crowdsim perturb <det-file> --drop P --dup Q --seed S
    crowdsim sweep <sweep.cfg>
    crowdsim report <results.csv> --group-by weather|density|tracker

Exit codes: 0 success, 2 config error, 3 I/O error.  CROWDSIM_THREADS caps
sweep parallelism.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from .config import ConfigError
from .motio import (MotFormatError, read_det_file, read_gt_file, read_seqinfo,
                    write_det_file, write_hypothesis_file)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3


def _cmd_generate(args):
    from .scenario import load_scenario_config, run_scenario

    cfg = load_scenario_config(args.config)
    seq_dirs = run_scenario(cfg)
    for d in seq_dirs:
        print(d)
    return EXIT_OK


def _cmd_track(args):
    from .sweep import run_tracker
    from .tracking import IouTrackerParams, SortParams, group_detections_by_frame
    from .tracking import track_iou, track_sort

    det_path = os.path.join(args.seq_dir, "det", "det.txt")
    dets = read_det_file(det_path)
    seqinfo = os.path.join(args.seq_dir, "seqinfo.ini")
    n_frames = read_seqinfo(seqinfo).seq_length if os.path.exists(seqinfo) else None
    by_frame = group_detections_by_frame(dets)
    if args.tracker == "iou":
        params = IouTrackerParams(sigma_l=args.sigma_l, sigma_h=args.sigma_h,
                                  sigma_iou=args.sigma_iou, t_min=args.t_min)
        tracks = track_iou(by_frame, params, n_frames=n_frames)
    else:
        params = SortParams(iou_threshold=args.iou_threshold,
                            max_age=args.max_age, min_hits=args.min_hits)
        tracks = track_sort(by_frame, params, n_frames=n_frames)
    out = args.out or os.path.join(args.seq_dir, f"hyp_{args.tracker}.txt")
    write_hypothesis_file(out, tracks)
    print(out)
    return EXIT_OK


def _cmd_evaluate(args):
    from .metrics import evaluate_sequence

    gt_path = os.path.join(args.gt_dir, "gt", "gt.txt")
    if not os.path.exists(gt_path):
        gt_path = args.gt_dir  # also accept a direct gt file path
    gt = read_gt_file(gt_path)
    hyp = read_gt_file(args.hyp_file)
    report = evaluate_sequence(gt, hyp)
    mota = "na" if report.mota is None else f"{report.mota:.6f}"
    print(f"num_gt={report.num_gt} fp={report.fp} fn={report.fn} "
          f"idsw={report.idsw} mota={mota}")
    return EXIT_OK


def _cmd_perturb(args):
    from .sensor import perturb_detections

    if not (0.0 <= args.drop <= 1.0 and 0.0 <= args.dup <= 1.0):
        raise ConfigError("--drop and --dup must be in [0, 1]")
    dets = read_det_file(args.det_file)
    rng = np.random.default_rng(np.random.SeedSequence([args.seed, 3]))
    out = perturb_detections(dets, args.drop, args.dup, rng)
    write_det_file(args.out or args.det_file, out)
    print(f"{len(dets)} -> {len(out)} detections")
    return EXIT_OK


def _cmd_sweep(args):
    from .sweep import load_sweep_config, run_sweep

    sweep = load_sweep_config(args.config)
    if args.threads:
        sweep.threads = args.threads

    def progress(cell):
        if not args.quiet:
            print("done: " + "-".join(str(c) for c in cell), file=sys.stderr)

    path = run_sweep(sweep, progress=progress)
    print(path)
    return EXIT_OK


def _cmd_report(args):
    from .report import write_report

    paths = write_report(args.results, args.group_by, out_dir=args.out_dir,
                         figures=not args.no_figures)
    for p in paths.values():
        print(p)
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="crowdsim", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="simulate a scenario and write MOT sequences")
    p.add_argument("config", help="scenario config file")
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("track", help="run a tracker over a sequence's det.txt")
    p.add_argument("seq_dir", help="MOT sequence directory")
    p.add_argument("--tracker", choices=("iou", "sort"), required=True)
    p.add_argument("--out", default=None, help="hypothesis output path")
    p.add_argument("--sigma-l", dest="sigma_l", type=float, default=0.0)
    p.add_argument("--sigma-h", dest="sigma_h", type=float, default=0.5)
    p.add_argument("--sigma-iou", dest="sigma_iou", type=float, default=0.5)
    p.add_argument("--t-min", dest="t_min", type=int, default=2)
    p.add_argument("--iou-threshold", dest="iou_threshold", type=float, default=0.3)
    p.add_argument("--max-age", dest="max_age", type=int, default=3)
    p.add_argument("--min-hits", dest="min_hits", type=int, default=3)
    p.set_defaults(func=_cmd_track)

    p = sub.add_parser("evaluate", help="CLEAR-MOT metrics for gt vs hypothesis")
    p.add_argument("gt_dir", help="sequence directory (or gt file)")
    p.add_argument("hyp_file", help="hypothesis file in the gt grammar")
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("perturb", help="randomly disturb a written det file")
    p.add_argument("det_file")
    p.add_argument("--drop", type=float, required=True, help="drop probability")
    p.add_argument("--dup", type=float, required=True, help="duplicate probability")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", default=None, help="output path (default: in place)")
    p.set_defaults(func=_cmd_perturb)

    p = sub.add_parser("sweep", help="run a parameter sweep into a results CSV")
    p.add_argument("config", help="sweep config file")
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("report", help="summaries, quantiles and figures from results")
    p.add_argument("results", help="results CSV from a sweep")
    p.add_argument("--group-by", dest="group_by", required=True,
                   choices=("weather", "density", "tracker"))
    p.add_argument("--out-dir", dest="out_dir", default=None)
    p.add_argument("--no-figures", dest="no_figures", action="store_true")
    p.set_defaults(func=_cmd_report)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, MotFormatError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
