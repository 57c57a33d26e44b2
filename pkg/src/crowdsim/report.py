"""Summaries over sweep results: per-group mean/std CSV, boxplot-ready
quantile file, and rendered boxplot figures next to the delimited output."""

from __future__ import annotations

import csv
import logging
import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from . import config as cfg
from .metrics import aggregate, write_aggregate_csv

log = logging.getLogger(__name__)

GROUP_KEYS = ("weather", "density", "tracker")


def read_results(results_csv):
    if not os.path.exists(results_csv):
        raise cfg.ConfigError(f"results file not found: {results_csv}")
    rows = []
    skipped = 0
    with open(results_csv, "r", encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            if row.get("error"):
                skipped += 1
                continue
            if not row.get("mota") or row["mota"] == "na":
                skipped += 1
                continue
            rows.append(row)
    if skipped:
        log.warning("skipped %d error/na rows in %s", skipped, results_csv)
    return rows


def _group_rows(rows, group_by):
    if group_by not in GROUP_KEYS:
        raise cfg.ConfigError(
            f"unknown group key {group_by!r} (choices: {', '.join(GROUP_KEYS)})"
        )
    groups = {}
    methods = {}
    for row in rows:
        key = row[group_by]
        groups.setdefault(key, []).append((float(row["mota"]), float(row["idsw"])))
        seen = methods.setdefault(key, set())
        seen.add(row["tracker"])
    method_label = {k: (next(iter(v)) if len(v) == 1 else "all")
                    for k, v in methods.items()}
    return groups, method_label


def _quantiles(values):
    v = np.asarray(values, dtype=float)
    return [float(np.min(v))] + [float(np.percentile(v, q)) for q in (25, 50, 75)] \
        + [float(np.max(v))]


def write_report(results_csv, group_by, out_dir=None, figures=True):
    """Write summary CSV, quantile CSV and (optionally) boxplot figures.

    Returns a dict of output paths.
    """
    rows = read_results(results_csv)
    groups, method_label = _group_rows(rows, group_by)
    if not groups:
        raise cfg.ConfigError(f"no usable rows in {results_csv}")
    if out_dir is None:
        out_dir = os.path.dirname(os.path.abspath(results_csv))
    os.makedirs(out_dir, exist_ok=True)

    agg_rows = aggregate(groups)
    ordered_keys = [row["group"] for row in agg_rows]
    paths = {}

    summary_path = os.path.join(out_dir, f"summary_by_{group_by}.csv")
    write_aggregate_csv(summary_path, agg_rows, methods=method_label)
    paths["summary"] = summary_path

    quant_path = os.path.join(out_dir, f"quantiles_by_{group_by}.csv")
    lines = ["group,metric,mean,std,min,q1,median,q3,max"]
    for key in ordered_keys:
        pairs = groups[key]
        for mi, metric in enumerate(("mota", "idsw")):
            vals = [p[mi] for p in pairs]
            q = _quantiles(vals)
            lines.append(
                f"{key},{metric},{np.mean(vals):.6f},{np.std(vals):.6f},"
                + ",".join(f"{x:.6f}" for x in q)
            )
    with open(quant_path, "w", encoding="ascii", newline="") as fh:
        fh.write("".join(line + "\n" for line in lines))
    paths["quantiles"] = quant_path

    if figures:
        for mi, metric in enumerate(("mota", "idsw")):
            fig, ax = plt.subplots(figsize=(6.4, 4.0))
            data = [[p[mi] for p in groups[key]] for key in ordered_keys]
            ax.boxplot(data, tick_labels=[str(k) for k in ordered_keys])
            ax.set_xlabel(group_by)
            ax.set_ylabel(metric.upper() if metric == "mota" else "ID switches")
            ax.set_title(f"{metric} by {group_by}")
            ax.grid(True, axis="y", alpha=0.3)
            fig.tight_layout()
            fig_path = os.path.join(out_dir, f"{metric}_by_{group_by}.png")
            fig.savefig(fig_path, dpi=120)
            plt.close(fig)
            paths[f"{metric}_figure"] = fig_path
    return paths
