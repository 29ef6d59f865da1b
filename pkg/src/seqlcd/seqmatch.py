"""Full-sweep sequence matching over the difference matrix.

For every query frame with a complete window, every reference frame with a
complete window is scored by summing distances along linear trajectories at
a sweep of assumed speeds; the minimum sum wins. Tie-breaking is total:
smaller reference index first, then smaller speed.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .backend import get_kernels
from .descriptor import DescriptorSet
from .diffmatrix import DifferenceMatrix, build_full
from .errors import OutOfSeqRange, QueryTooShort, UncomputedEntry


@dataclass(frozen=True)
class MatcherParams:
    """Knobs of the sequence matcher.

    ``ds`` is the sequence length (even; the window spans ds/2 frames on
    each side). The speed sweep runs v_min..v_max inclusive in v_step
    increments. ``r_window`` is the recent-template exclusion radius, only
    applied between a traversal and itself; it also sets the exclusion zone
    around the best match when picking the runner-up score.
    """

    ds: int
    v_min: float = 0.8
    v_max: float = 1.2
    v_step: float = 0.1
    r_window: int = 10
    same_traversal: bool = False

    def __post_init__(self) -> None:
        if self.ds < 2 or self.ds % 2:
            raise ValueError(f"ds must be even and >= 2, got {self.ds}")
        if not (0 < self.v_min <= self.v_max):
            raise ValueError(f"need 0 < v_min <= v_max, got [{self.v_min}, {self.v_max}]")
        if self.v_step <= 0:
            raise ValueError(f"v_step must be positive, got {self.v_step}")
        if self.r_window < 0:
            raise ValueError(f"r_window must be >= 0, got {self.r_window}")

    def speed_grid(self) -> np.ndarray:
        """Speeds v_min, v_min+v_step, ... up to v_max (inclusive within 1e-9)."""
        count = int(math.floor((self.v_max - self.v_min) / self.v_step + 1e-9)) + 1
        return self.v_min + self.v_step * np.arange(count, dtype=np.float64)


@dataclass(frozen=True)
class SeqScore:
    """Sequence-difference score of one (query, reference) candidate."""

    query_index: int
    ref_index: int
    speed: float
    score: float


@dataclass
class Instrumentation:
    """Work counters for the runtime comparison between matcher variants."""

    frames: list[int] = field(default_factory=list)
    candidates_scored: list[int] = field(default_factory=list)
    entries_computed: list[int] = field(default_factory=list)
    reinit_flags: list[bool] = field(default_factory=list)
    setup_entries: int = 0
    n_speeds: int = 0

    def record(self, frame: int, candidates: int, entries: int, reinit: bool) -> None:
        self.frames.append(frame)
        self.candidates_scored.append(candidates)
        self.entries_computed.append(entries)
        self.reinit_flags.append(reinit)

    @property
    def total_evals(self) -> int:
        return self.n_speeds * sum(self.candidates_scored)

    @property
    def total_entries(self) -> int:
        return self.setup_entries + sum(self.entries_computed)

    @property
    def total_work(self) -> int:
        return self.total_evals + self.total_entries

    def to_csv(self, path) -> None:
        with open(path, "w", newline="\n") as fh:
            writer = csv.writer(fh)
            writer.writerow(["frame", "candidates_scored", "entries_computed", "reinit_flag"])
            for f, c, e, r in zip(
                self.frames, self.candidates_scored, self.entries_computed, self.reinit_flags
            ):
                writer.writerow([f, c, e, int(r)])


@dataclass
class MatchResult:
    """Per-query-frame match decisions, one slot per frame with a full window."""

    query_indices: np.ndarray  # int64
    best_refs: np.ndarray  # int64
    best_scores: np.ndarray  # float64
    second_scores: np.ndarray  # float64, nan when no runner-up exists
    confidences: np.ndarray  # float64, second/best
    speeds: np.ndarray  # float64
    query_count: int = 0
    ref_count: int = 0
    instrumentation: Instrumentation | None = None

    def __len__(self) -> int:
        return len(self.query_indices)

    def accepted(self, theta: float) -> np.ndarray:
        """Boolean per-frame acceptance after thresholding the confidence ratio."""
        return self.confidences >= theta

    def to_csv(self, path) -> None:
        with open(path, "w", newline="\n") as fh:
            writer = csv.writer(fh)
            writer.writerow(
                ["query_index", "best_ref", "best_score", "second_score", "confidence", "speed"]
            )
            for i in range(len(self.query_indices)):
                writer.writerow(
                    [
                        int(self.query_indices[i]),
                        int(self.best_refs[i]),
                        repr(float(self.best_scores[i])),
                        repr(float(self.second_scores[i])),
                        repr(float(self.confidences[i])),
                        repr(float(self.speeds[i])),
                    ]
                )

    @classmethod
    def from_csv(cls, path) -> "MatchResult":
        rows = []
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or header[0] != "query_index":
                raise ValueError(f"{path}: not a match result CSV")
            for rec in reader:
                rows.append(
                    (int(rec[0]), int(rec[1]), float(rec[2]), float(rec[3]), float(rec[4]), float(rec[5]))
                )
        if rows:
            qi, br, bs, ss, cf, sp = (np.asarray(col) for col in zip(*rows))
        else:
            qi = br = np.zeros(0, dtype=np.int64)
            bs = ss = cf = sp = np.zeros(0, dtype=np.float64)
        return cls(
            qi.astype(np.int64),
            br.astype(np.int64),
            bs.astype(np.float64),
            ss.astype(np.float64),
            cf.astype(np.float64),
            sp.astype(np.float64),
        )


def count_distance_evals(result: MatchResult) -> Instrumentation:
    """Instrumentation attached to a match run; requires it was enabled."""
    if result.instrumentation is None:
        raise ValueError("matching ran without instrumentation")
    return result.instrumentation


def _round_half_away(x: float) -> int:
    f = math.floor(x)
    d = x - f
    if d > 0.5:
        return int(f) + 1
    if d < 0.5:
        return int(f)
    return int(f) + 1 if x > 0 else int(f)


def _window_cols(n: int, ds: int, cols: int) -> range:
    ds2 = ds // 2
    if n - ds2 < 0 or n + ds2 >= cols:
        raise OutOfSeqRange(f"frame {n} window [{n - ds2}, {n + ds2}] exceeds [0, {cols})")
    return range(n - ds2, n + ds2 + 1)


def cal_seq_dif(matrix: DifferenceMatrix, n: int, q: int, v: float, params: MatcherParams) -> float:
    """Sum of distances along the speed-v trajectory through (q, n).

    ds+1 terms; speed-scaled reference indices are rounded half away from
    zero and clamped into the row range.
    """
    ds = params.ds
    ds2 = ds // 2
    window = _window_cols(n, ds, matrix.cols)
    for c in window:
        if not matrix.computed[c]:
            raise UncomputedEntry(f"column {c} needed by frame {n} was never computed")
    hi = matrix.rows - 1
    acc = 0.0
    for i in range(ds + 1):
        r = _round_half_away(v * (q - ds2 + i))
        r = 0 if r < 0 else (hi if r > hi else r)
        acc += float(matrix.data[r, n - ds2 + i])
    return acc


def sweep_speeds(matrix: DifferenceMatrix, n: int, q: int, params: MatcherParams) -> SeqScore:
    """Minimum cal_seq_dif over the speed grid; ties keep the smaller speed."""
    best_score = None
    best_v = None
    for v in params.speed_grid():
        s = cal_seq_dif(matrix, n, q, float(v), params)
        if best_score is None or s < best_score:
            best_score = s
            best_v = float(v)
    return SeqScore(query_index=n, ref_index=q, speed=best_v, score=best_score)


def valid_query_frames(query_count: int, ds: int) -> range:
    """Query frames with a full ds-window on both sides."""
    return range(ds // 2, query_count - ds // 2)


def valid_candidates(ref_count: int, ds: int) -> np.ndarray:
    """Reference frames whose unit-speed window stays in bounds."""
    return np.arange(ds // 2, ref_count - ds // 2, dtype=np.intp)


def frame_candidates(
    base: np.ndarray, n: int, params: MatcherParams
) -> np.ndarray:
    """Drop recent templates around n when matching a traversal to itself."""
    if params.same_traversal and params.r_window >= 0:
        return base[np.abs(base - n) > params.r_window]
    return base


def select_match(
    qs: np.ndarray,
    scores: np.ndarray,
    speed_idx: np.ndarray,
    speeds: np.ndarray,
    r_window: int,
) -> tuple[int, float, float, float, float]:
    """Pick the argmin and the best score outside +-r_window of it.

    ``qs`` must be ascending so argmin's first-hit rule breaks ties toward
    the smaller reference index. Returns (best_ref, best_score,
    second_score, confidence, speed).
    """
    pos = int(np.argmin(scores))
    best_q = int(qs[pos])
    best_score = float(scores[pos])
    speed = float(speeds[speed_idx[pos]])

    away = np.abs(qs - best_q) > r_window
    if away.any():
        second = float(scores[away].min())
    else:
        second = math.nan

    if math.isnan(second):
        confidence = math.inf
    elif best_score == 0.0:
        confidence = math.inf if second > 0.0 else 1.0
    else:
        confidence = second / best_score
    return best_q, best_score, second, confidence, speed


def match_all(
    reference: DescriptorSet,
    query: DescriptorSet,
    params: MatcherParams,
    threads: int = 1,
    kernels=None,
    instrument: bool = False,
) -> MatchResult:
    """Full sweep: build the whole matrix, score every candidate per frame."""
    kernels = kernels or get_kernels()
    ds = params.ds
    frames = valid_query_frames(query.count, ds)
    if len(frames) == 0:
        raise QueryTooShort(f"query has {query.count} frames, none with a full ds={ds} window")
    base = valid_candidates(reference.count, ds)
    if len(base) == 0:
        raise QueryTooShort(f"reference has {reference.count} frames, no full ds={ds} window")

    matrix = build_full(reference, query, threads=threads, kernels=kernels)
    speeds = params.speed_grid()

    frames_arr = np.asarray(frames, dtype=np.intp)
    nf = len(frames_arr)
    out_q = np.empty(nf, dtype=np.int64)
    out_ref = np.empty(nf, dtype=np.int64)
    out_best = np.empty(nf, dtype=np.float64)
    out_second = np.empty(nf, dtype=np.float64)
    out_conf = np.empty(nf, dtype=np.float64)
    out_speed = np.empty(nf, dtype=np.float64)
    out_cands = np.zeros(nf, dtype=np.int64)
    keep = np.ones(nf, dtype=bool)

    def run_slice(lo: int, hi: int) -> None:
        for slot in range(lo, hi):
            n = int(frames_arr[slot])
            qs = frame_candidates(base, n, params)
            out_cands[slot] = len(qs)
            if len(qs) == 0:
                keep[slot] = False
                continue
            scores, vidx = kernels.score_candidates(matrix.data, n, qs, speeds, ds)
            best_q, best, second, conf, speed = select_match(
                qs, scores, vidx, speeds, params.r_window
            )
            out_q[slot] = n
            out_ref[slot] = best_q
            out_best[slot] = best
            out_second[slot] = second
            out_conf[slot] = conf
            out_speed[slot] = speed

    if threads <= 1 or nf < 2 * threads:
        run_slice(0, nf)
    else:
        bounds = np.linspace(0, nf, threads + 1, dtype=int)
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = [
                pool.submit(run_slice, int(bounds[t]), int(bounds[t + 1])) for t in range(threads)
            ]
            for f in futures:
                f.result()

    result = MatchResult(
        out_q[keep],
        out_ref[keep],
        out_best[keep],
        out_second[keep],
        out_conf[keep],
        out_speed[keep],
        query_count=query.count,
        ref_count=reference.count,
    )
    if instrument:
        instr = Instrumentation(setup_entries=matrix.rows * matrix.cols, n_speeds=len(speeds))
        for slot in range(nf):
            instr.record(int(frames_arr[slot]), int(out_cands[slot]), 0, False)
        result.instrumentation = instr
    return result
