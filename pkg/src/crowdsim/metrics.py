"""CLEAR-MOT evaluation: frame-by-frame matching with carry-over preference,
FP/FN/ID-switch counting, MOTA, and mean/std aggregation.

Matching per frame: pairs matched before (the gt id's last-ever hypothesis)
are kept while they still overlap at the IOU gate; the remainder is matched
by Hungarian assignment preferring more matches, then higher total IOU.  An
ID switch is counted whenever a gt id's matched hypothesis differs from its
last-ever match (gap tolerant).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .boxes import iou
from .tracking import iou_matrix, solve_assignment

log = logging.getLogger(__name__)

IOU_MIN = 0.5
_INFEASIBLE = 1e6  # >> any feasible 1-iou cost; keeps assignment max-cardinality


@dataclass
class MetricsReport:
    num_gt: int
    fp: int
    fn: int
    idsw: int
    mota: float  # None when num_gt == 0
    matches_per_frame: list


def match_frame(gt_boxes, hyp_boxes, prev, iou_min=IOU_MIN):
    """Match one frame's gt to hypothesis boxes.

    gt_boxes / hyp_boxes: dicts id -> Box.  prev maps gt id to its last-ever
    matched hyp id.  Returns (matches, fp, fn, switched_gt_ids) where matches
    maps gt id -> hyp id for this frame.
    """
    matches = {}
    free_gt = list(gt_boxes)
    free_hyp = list(hyp_boxes)

    # carry-over: keep still-overlapping previous pairs
    for gid in list(free_gt):
        hid = prev.get(gid)
        if hid is not None and hid in hyp_boxes and hid in free_hyp:
            if iou(gt_boxes[gid], hyp_boxes[hid]) >= iou_min:
                matches[gid] = hid
                free_gt.remove(gid)
                free_hyp.remove(hid)

    if free_gt and free_hyp:
        ious = iou_matrix([gt_boxes[g] for g in free_gt],
                          [hyp_boxes[h] for h in free_hyp])
        cost = np.where(ious >= iou_min, 1.0 - ious, _INFEASIBLE)
        for i, j in solve_assignment(cost):
            if cost[i, j] < _INFEASIBLE:
                matches[free_gt[i]] = free_hyp[j]

    fn = len(gt_boxes) - len(matches)
    fp = len(hyp_boxes) - len(matches)
    switched = [gid for gid, hid in matches.items()
                if gid in prev and prev[gid] != hid]
    return matches, fp, fn, switched


def _group_by_frame(entries):
    frames = {}
    for e in entries:
        frames.setdefault(e.frame, {})[e.object_id] = e.box
    return frames


def evaluate_sequence(gt_entries, hyp_entries, iou_min=IOU_MIN):
    """Fold match_frame over the sequence and fill a MetricsReport."""
    gt_frames = _group_by_frame(gt_entries)
    hyp_frames = _group_by_frame(hyp_entries)
    last_frame = max(list(gt_frames) + list(hyp_frames), default=0)

    prev = {}
    fp = fn = idsw = 0
    matches_per_frame = []
    for frame in range(1, last_frame + 1):
        gt_boxes = gt_frames.get(frame, {})
        hyp_boxes = hyp_frames.get(frame, {})
        matches, f_fp, f_fn, switched = match_frame(gt_boxes, hyp_boxes, prev, iou_min)
        fp += f_fp
        fn += f_fn
        idsw += len(switched)
        matches_per_frame.append(len(matches))
        prev.update(matches)

    num_gt = len(gt_entries)
    mota = 1.0 - (fp + fn + idsw) / num_gt if num_gt > 0 else None
    return MetricsReport(num_gt=num_gt, fp=fp, fn=fn, idsw=idsw, mota=mota,
                         matches_per_frame=matches_per_frame)


def aggregate(groups):
    """Per-group mean/std rows, ordered by key.

    groups: mapping key -> list of MetricsReport (or (mota, idsw) pairs).
    Population standard deviation.  Empty groups are dropped with a warning.
    """
    rows = []
    for key in sorted(groups, key=_sort_key):
        reports = groups[key]
        motas, idsws = [], []
        for rep in reports:
            if isinstance(rep, MetricsReport):
                if rep.mota is None:
                    log.warning("group %r: skipping report without gt boxes", key)
                    continue
                motas.append(rep.mota)
                idsws.append(rep.idsw)
            else:
                motas.append(float(rep[0]))
                idsws.append(float(rep[1]))
        if not motas:
            log.warning("group %r is empty; excluded from aggregation", key)
            continue
        rows.append({
            "group": key,
            "mota_mean": float(np.mean(motas)),
            "mota_std": float(np.std(motas)),
            "idsw_mean": float(np.mean(idsws)),
            "idsw_std": float(np.std(idsws)),
            "n": len(motas),
        })
    return rows


def _sort_key(key):
    try:
        return (0, float(key), "")
    except (TypeError, ValueError):
        return (1, 0.0, str(key))


AGGREGATE_CSV_HEADER = "group,method,mota_mean,mota_std,idsw_mean,idsw_std,n"


def write_aggregate_csv(path, rows, methods=None):
    """Write aggregate rows in the documented CSV grammar.

    methods: optional mapping group -> method label ("all" when mixed).
    """
    lines = [AGGREGATE_CSV_HEADER]
    for row in rows:
        method = (methods or {}).get(row["group"], "all")
        lines.append(
            f"{row['group']},{method},{row['mota_mean']:.6f},{row['mota_std']:.6f},"
            f"{row['idsw_mean']:.6f},{row['idsw_std']:.6f},{row['n']}"
        )
    with open(path, "w", encoding="ascii", newline="") as fh:
        fh.write("".join(line + "\n" for line in lines))
    return path
