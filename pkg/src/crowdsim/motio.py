"""MOT Challenge sequence directories: gt/gt.txt, det/det.txt, seqinfo.ini.

Line grammars (fixed 2-decimal floats, "\\n" newlines, byte-deterministic):
    gt:  frame,id,left,top,width,height,conf,class,visibility   (conf always 1)
    det: frame,-1,left,top,width,height,conf,-1,-1,-1
Hypothesis files reuse the gt grammar with conf=1, class=1, visibility=1.00.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

from .boxes import Box
from .sensor import Detection, GtEntry


class MotFormatError(ValueError):
    """A MOT file failed to parse; message carries file and 1-based line."""


@dataclass(frozen=True)
class SequenceMeta:
    name: str
    seq_length: int
    frame_rate: int = 25
    im_width: int = 800
    im_height: int = 600
    im_ext: str = ".jpg"
    im_dir: str = "img1"

    def __post_init__(self):
        if self.seq_length < 1:
            raise ValueError("seq_length must be >= 1")
        if self.frame_rate <= 0:
            raise ValueError("frame_rate must be positive")


def format_gt_line(entry):
    b = entry.box
    return (f"{entry.frame},{entry.object_id},{b.left:.2f},{b.top:.2f},"
            f"{b.width:.2f},{b.height:.2f},1,{entry.cls},{entry.visibility:.2f}")


def format_det_line(det):
    b = det.box
    return (f"{det.frame},-1,{b.left:.2f},{b.top:.2f},"
            f"{b.width:.2f},{b.height:.2f},{det.conf:.2f},-1,-1,-1")


def _write_lines(path, lines):
    with open(path, "w", encoding="ascii", newline="") as fh:
        fh.write("".join(line + "\n" for line in lines))


def write_gt_file(path, entries):
    ordered = sorted(entries, key=lambda e: (e.frame, e.object_id))
    for prev, cur in zip(ordered, ordered[1:]):
        if (prev.frame, prev.object_id) == (cur.frame, cur.object_id):
            raise ValueError(
                f"duplicate gt entry for frame {cur.frame}, id {cur.object_id}"
            )
    _write_lines(path, [format_gt_line(e) for e in ordered])


def write_det_file(path, detections):
    ordered = sorted(detections, key=lambda d: d.frame)
    _write_lines(path, [format_det_line(d) for d in ordered])


def write_seqinfo(path, meta):
    lines = [
        "[Sequence]",
        f"name={meta.name}",
        f"imDir={meta.im_dir}",
        f"frameRate={meta.frame_rate}",
        f"seqLength={meta.seq_length}",
        f"imWidth={meta.im_width}",
        f"imHeight={meta.im_height}",
        f"imExt={meta.im_ext}",
    ]
    _write_lines(path, lines)


def write_sequence(seq_dir, meta, gt_entries, detections):
    """Write a full MOT sequence directory; overwrites existing files."""
    for e in gt_entries:
        if e.frame > meta.seq_length:
            raise ValueError(f"gt frame {e.frame} exceeds seqLength {meta.seq_length}")
    for d in detections:
        if d.frame > meta.seq_length:
            raise ValueError(f"det frame {d.frame} exceeds seqLength {meta.seq_length}")
    os.makedirs(os.path.join(seq_dir, "gt"), exist_ok=True)
    os.makedirs(os.path.join(seq_dir, "det"), exist_ok=True)
    write_seqinfo(os.path.join(seq_dir, "seqinfo.ini"), meta)
    write_gt_file(os.path.join(seq_dir, "gt", "gt.txt"), gt_entries)
    write_det_file(os.path.join(seq_dir, "det", "det.txt"), detections)


def _parse_num(tok, path, lineno, kind):
    try:
        return int(tok) if kind is int else float(tok)
    except ValueError:
        raise MotFormatError(
            f"{path}:{lineno}: expected {kind.__name__}, got {tok!r}"
        ) from None


def read_gt_file(path):
    entries = []
    for lineno, raw in enumerate(_read_lines(path), start=1):
        toks = raw.split(",")
        if len(toks) != 9:
            raise MotFormatError(f"{path}:{lineno}: expected 9 fields, got {len(toks)}")
        frame = _parse_num(toks[0], path, lineno, int)
        oid = _parse_num(toks[1], path, lineno, int)
        nums = [_parse_num(t, path, lineno, float) for t in toks[2:6]]
        _parse_num(toks[6], path, lineno, int)  # conf, always 1
        cls = _parse_num(toks[7], path, lineno, int)
        vis = _parse_num(toks[8], path, lineno, float)
        entries.append(GtEntry(frame=frame, object_id=oid, box=Box(*nums),
                               cls=cls, visibility=vis))
    return entries


def read_det_file(path):
    dets = []
    for lineno, raw in enumerate(_read_lines(path), start=1):
        toks = raw.split(",")
        if len(toks) != 10:
            raise MotFormatError(f"{path}:{lineno}: expected 10 fields, got {len(toks)}")
        frame = _parse_num(toks[0], path, lineno, int)
        nums = [_parse_num(t, path, lineno, float) for t in toks[2:6]]
        conf = _parse_num(toks[6], path, lineno, float)
        dets.append(Detection(frame=frame, box=Box(*nums), conf=conf))
    return dets


def _read_lines(path):
    if not os.path.exists(path):
        raise MotFormatError(f"missing file: {path}")
    with open(path, "r", encoding="ascii", newline="") as fh:
        text = fh.read()
    return [line for line in text.split("\n") if line != ""]


def read_seqinfo(path):
    values = {}
    section_seen = False
    for lineno, raw in enumerate(_read_lines(path), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("["):
            if line != "[Sequence]":
                raise MotFormatError(f"{path}:{lineno}: unexpected section {line!r}")
            section_seen = True
            continue
        if "=" not in line:
            raise MotFormatError(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, _, value = line.partition("=")
        values[key.strip()] = value.strip()
    if not section_seen:
        raise MotFormatError(f"{path}: missing [Sequence] section")
    try:
        return SequenceMeta(
            name=values["name"],
            seq_length=int(values["seqLength"]),
            frame_rate=int(values["frameRate"]),
            im_width=int(values["imWidth"]),
            im_height=int(values["imHeight"]),
            im_ext=values["imExt"],
            im_dir=values["imDir"],
        )
    except KeyError as exc:
        raise MotFormatError(f"{path}: missing key {exc.args[0]!r}") from None
    except ValueError as exc:
        raise MotFormatError(f"{path}: {exc}") from None


def read_sequence(seq_dir):
    """Read a sequence directory; read(write(x)) == x for written sequences."""
    meta = read_seqinfo(os.path.join(seq_dir, "seqinfo.ini"))
    gt = read_gt_file(os.path.join(seq_dir, "gt", "gt.txt"))
    det = read_det_file(os.path.join(seq_dir, "det", "det.txt"))
    return meta, gt, det


def write_hypothesis_file(path, tracks):
    """Write tracker output in the gt grammar (conf 1, class 1, vis 1.00)."""
    rows = []
    for track in tracks:
        for frame, box in track.boxes:
            rows.append(GtEntry(frame=frame, object_id=track.hyp_id, box=box,
                                cls=1, visibility=1.0))
    write_gt_file(path, rows)
