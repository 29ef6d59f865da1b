"""Ground-truth evaluation: precision, recall, PR curves, and plots.

A proposed match counts as correct when it lands within ``tolerance``
frames of the ground-truth reference. Recall is measured against every
ground-truth-matchable frame the matcher evaluated, so an accepted but
wrong match costs both a false positive and the frame's true match.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import FrameMismatch, IoFailure
from .seqmatch import MatchResult


@dataclass
class GroundTruth:
    """Optional true reference index per query frame.

    Frames missing from ``mapping`` have no valid match. ``query_count``,
    when known, lets evaluation verify the result covers the same frames.
    """

    mapping: dict[int, int]
    tolerance: int = 2
    query_count: int | None = None

    @classmethod
    def identity(cls, frames, tolerance: int = 2, query_count: int | None = None) -> "GroundTruth":
        """Aligned-traversal truth: each query frame matches its own index."""
        return cls({int(f): int(f) for f in frames}, tolerance=tolerance, query_count=query_count)

    @classmethod
    def from_csv(cls, path, tolerance: int = 2) -> "GroundTruth":
        mapping: dict[int, int] = {}
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            for rec in reader:
                if not rec or rec[0].strip().startswith("#"):
                    continue
                if rec[0] == "query_index":
                    continue
                mapping[int(rec[0])] = int(rec[1])
        return cls(mapping, tolerance=tolerance)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="\n") as fh:
            writer = csv.writer(fh)
            writer.writerow(["query_index", "ref_index"])
            for q in sorted(self.mapping):
                writer.writerow([q, self.mapping[q]])


@dataclass
class EvalReport:
    """PR curve points with their raw counts."""

    thresholds: np.ndarray
    precisions: np.ndarray
    recalls: np.ndarray
    tps: np.ndarray
    fps: np.ndarray
    fns: np.ndarray
    max_recall_at_full_precision: float = 0.0

    def __len__(self) -> int:
        return len(self.thresholds)


def label_matches(result: MatchResult, gt: GroundTruth, theta: float) -> tuple[int, int, int]:
    """Count TP / FP / FN over the frames the result covers at threshold theta."""
    if gt.query_count is not None:
        covered = (result.query_indices >= 0) & (result.query_indices < gt.query_count)
        if not covered.all():
            raise FrameMismatch(
                f"result frames extend past the ground truth's {gt.query_count} query frames"
            )
    tp = fp = fn = 0
    accepted_mask = result.accepted(theta)
    for i in range(len(result.query_indices)):
        n = int(result.query_indices[i])
        accepted = bool(accepted_mask[i])
        truth = gt.mapping.get(n)
        correct = truth is not None and abs(int(result.best_refs[i]) - truth) <= gt.tolerance
        if accepted:
            if correct:
                tp += 1
            else:
                fp += 1
        if truth is not None and not (accepted and correct):
            fn += 1
    return tp, fp, fn


def default_theta_grid(result: MatchResult, points: int = 100) -> np.ndarray:
    """Evenly spaced order statistics of the observed confidences."""
    conf = np.sort(result.confidences)
    if len(conf) == 0:
        return np.asarray([1.0])
    take = np.unique(np.linspace(0, len(conf) - 1, min(points, len(conf))).round().astype(int))
    return np.unique(conf[take])


def pr_curve(result: MatchResult, gt: GroundTruth, theta_grid=None) -> EvalReport:
    """Sweep the acceptance threshold and trace precision/recall.

    "Full precision" means literally zero false positives at that
    threshold, not a rounded value.
    """
    if theta_grid is None:
        theta_grid = default_theta_grid(result)
    thetas = np.asarray(theta_grid, dtype=np.float64)
    tps = np.zeros(len(thetas), dtype=np.int64)
    fps = np.zeros(len(thetas), dtype=np.int64)
    fns = np.zeros(len(thetas), dtype=np.int64)
    precisions = np.zeros(len(thetas))
    recalls = np.zeros(len(thetas))
    best_clean = 0.0
    for i, theta in enumerate(thetas):
        tp, fp, fn = label_matches(result, gt, float(theta))
        tps[i], fps[i], fns[i] = tp, fp, fn
        precisions[i] = tp / (tp + fp) if tp + fp else 1.0
        recalls[i] = tp / (tp + fn) if tp + fn else 0.0
        if fp == 0 and recalls[i] > best_clean:
            best_clean = float(recalls[i])
    return EvalReport(thetas, precisions, recalls, tps, fps, fns, best_clean)


def write_curve_csv(report: EvalReport, path) -> None:
    try:
        with open(path, "w", newline="\n") as fh:
            writer = csv.writer(fh)
            writer.writerow(["theta", "precision", "recall", "tp", "fp", "fn"])
            for i in range(len(report)):
                writer.writerow(
                    [
                        repr(float(report.thresholds[i])),
                        repr(float(report.precisions[i])),
                        repr(float(report.recalls[i])),
                        int(report.tps[i]),
                        int(report.fps[i]),
                        int(report.fns[i]),
                    ]
                )
    except OSError as exc:
        raise IoFailure(str(exc)) from exc


def read_curve_csv(path) -> tuple[np.ndarray, np.ndarray]:
    """Recall and precision columns of a stored curve, for re-plotting."""
    recalls = []
    precisions = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or header[0] != "theta":
            raise IoFailure(f"{path}: not a curve CSV")
        for rec in reader:
            precisions.append(float(rec[1]))
            recalls.append(float(rec[2]))
    return np.asarray(recalls), np.asarray(precisions)


_SVG_W, _SVG_H = 640, 480
_MARGIN = 60
_PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]


def _sx(x: float) -> float:
    return _MARGIN + x * (_SVG_W - 2 * _MARGIN)


def _sy(y: float) -> float:
    return _SVG_H - _MARGIN - y * (_SVG_H - 2 * _MARGIN)


def render_pr_svg(series: list[tuple[str, np.ndarray, np.ndarray]], path) -> None:
    """Write a standalone SVG of one or more PR curves (recall vs precision).

    Output bytes are a pure function of the input (no timestamps, fixed
    float formatting), so identical runs diff clean.
    """
    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_SVG_W}" height="{_SVG_H}" '
        f'viewBox="0 0 {_SVG_W} {_SVG_H}">',
        f'<rect width="{_SVG_W}" height="{_SVG_H}" fill="white"/>',
        f'<line x1="{_sx(0):.1f}" y1="{_sy(0):.1f}" x2="{_sx(1):.1f}" y2="{_sy(0):.1f}" '
        'stroke="black" stroke-width="1"/>',
        f'<line x1="{_sx(0):.1f}" y1="{_sy(0):.1f}" x2="{_sx(0):.1f}" y2="{_sy(1):.1f}" '
        'stroke="black" stroke-width="1"/>',
    ]
    for tick in (0.0, 0.2, 0.4, 0.6, 0.8, 1.0):
        lines.append(
            f'<text x="{_sx(tick):.1f}" y="{_sy(0) + 20:.1f}" font-size="12" '
            f'text-anchor="middle">{tick:.1f}</text>'
        )
        lines.append(
            f'<text x="{_sx(0) - 10:.1f}" y="{_sy(tick) + 4:.1f}" font-size="12" '
            f'text-anchor="end">{tick:.1f}</text>'
        )
        if tick > 0:
            lines.append(
                f'<line x1="{_sx(tick):.1f}" y1="{_sy(0):.1f}" x2="{_sx(tick):.1f}" '
                f'y2="{_sy(1):.1f}" stroke="#dddddd" stroke-width="0.5"/>'
            )
            lines.append(
                f'<line x1="{_sx(0):.1f}" y1="{_sy(tick):.1f}" x2="{_sx(1):.1f}" '
                f'y2="{_sy(tick):.1f}" stroke="#dddddd" stroke-width="0.5"/>'
            )
    lines.append(
        f'<text x="{_SVG_W / 2:.1f}" y="{_SVG_H - 15:.1f}" font-size="14" '
        'text-anchor="middle">Recall</text>'
    )
    lines.append(
        f'<text x="18" y="{_SVG_H / 2:.1f}" font-size="14" text-anchor="middle" '
        f'transform="rotate(-90 18 {_SVG_H / 2:.1f})">Precision</text>'
    )
    for si, (label, recalls, precisions) in enumerate(series):
        color = _PALETTE[si % len(_PALETTE)]
        pts = " ".join(
            f"{_sx(float(r)):.2f},{_sy(float(p)):.2f}" for r, p in zip(recalls, precisions)
        )
        if pts:
            lines.append(
                f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="2"/>'
            )
        ly = _MARGIN + 18 * si + 10
        lines.append(
            f'<line x1="{_SVG_W - 170}" y1="{ly - 4}" x2="{_SVG_W - 145}" y2="{ly - 4}" '
            f'stroke="{color}" stroke-width="2"/>'
        )
        lines.append(
            f'<text x="{_SVG_W - 140}" y="{ly}" font-size="12">{label}</text>'
        )
    lines.append("</svg>")
    try:
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
    except OSError as exc:
        raise IoFailure(str(exc)) from exc


def emit_plot(report: EvalReport, out_prefix, label: str = "pr") -> tuple[Path, Path]:
    """Write {prefix}.csv and {prefix}.svg for one report; returns the paths."""
    csv_path = Path(f"{out_prefix}.csv")
    svg_path = Path(f"{out_prefix}.svg")
    write_curve_csv(report, csv_path)
    render_pr_svg([(label, report.recalls, report.precisions)], svg_path)
    return csv_path, svg_path
