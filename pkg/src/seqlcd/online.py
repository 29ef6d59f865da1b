"""Online adaptation of the candidate-range count K.

Each query frame gets an image matching label (IML): the rank of the
candidate range that contained its chosen match. While the scene-change
ratio stays inside its gate band, K shrinks to the maximum IML of the last
batch; when the ratio leaves the band, K snaps back to its initial value
so the matcher widens its search in the same frame.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .accel import CandidateSet, _seed_ranges, _WindowedEngine
from .backend import get_kernels
from .descriptor import DescriptorSet
from .errors import InsufficientHistory, NotInAnyRange
from .seqmatch import MatcherParams, MatchResult, SeqScore, Instrumentation

# Eq-level constant: the change ratio compares a frame against its previous
# ten frames, so a value needs the twelve frames n-11 .. n.
CHANGE_WINDOW = 10


@dataclass(frozen=True)
class OnlineParams:
    """Adaptive-K knobs: initial K, range width, batch size, gate band."""

    initial_k: int = 30
    num: int = 16
    t_window: int = 10
    cd_low: float = 0.9
    cd_high: float = 1.1

    def __post_init__(self) -> None:
        if self.initial_k < 1:
            raise ValueError(f"initial_k must be >= 1, got {self.initial_k}")
        if self.num < 2 or self.num % 2:
            raise ValueError(f"num must be even and >= 2, got {self.num}")
        if self.t_window < 1:
            raise ValueError(f"t_window must be >= 1, got {self.t_window}")
        if not (0 < self.cd_low < self.cd_high):
            raise ValueError(f"need 0 < cd_low < cd_high, got [{self.cd_low}, {self.cd_high}]")


@dataclass
class AdaptState:
    """Mutable adaptation state carried across frames."""

    current_k: int
    iml_buffer: list[int] = field(default_factory=list)
    t_count: int = 0

    def reset(self, k: int) -> None:
        self.current_k = k
        self.iml_buffer.clear()
        self.t_count = 0


def _recent_spread(values: np.ndarray, m: int) -> float:
    """Sum of distances from descriptor m to its previous CHANGE_WINDOW frames."""
    prev = values[m - CHANGE_WINDOW : m].astype(np.float64)
    cur = values[m].astype(np.float64)
    return float(np.sqrt(((prev - cur) ** 2).sum(axis=1)).sum())


def change_degree(history) -> float:
    """Scene-change ratio at the newest frame of ``history``.

    ``history`` holds consecutive query descriptors ending at the current
    frame; the ratio divides the current frame's summed distance to its
    previous ten frames by the same quantity one frame earlier, so twelve
    frames are required. A zero denominator (a frozen scene) reads as
    "no change" and returns 1.0.
    """
    arr = np.asarray(history, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] < CHANGE_WINDOW + 2:
        raise InsufficientHistory(
            f"need {CHANGE_WINDOW + 2} consecutive descriptors, got {arr.shape[0]}"
        )
    m = arr.shape[0] - 1
    num = _recent_spread(arr, m)
    den = _recent_spread(arr, m - 1)
    if den == 0.0:
        return 1.0
    return num / den


def record_iml(
    state: AdaptState,
    sorted_scores: list[SeqScore],
    chosen_ref: int,
    params: OnlineParams,
    ref_count: int,
) -> AdaptState:
    """Append the rank of the seed range containing the chosen match.

    ``sorted_scores`` are the previous frame's candidates in ascending
    score order — the same list whose head seeded the current candidate
    set. The smallest containing range wins.
    """
    seeds = np.asarray(
        [s.ref_index for s in sorted_scores[: state.current_k]], dtype=np.intp
    )
    cand = _seed_ranges(seeds, params.num, ref_count)
    return _record_iml_ranges(state, cand, chosen_ref)


def _record_iml_ranges(state: AdaptState, cand: CandidateSet, chosen_ref: int) -> AdaptState:
    iml = None
    for rank, (_, lo, hi) in enumerate(cand.ranges, start=1):
        if lo <= chosen_ref <= hi:
            iml = rank
            break
    if iml is None:
        raise NotInAnyRange(f"match {chosen_ref} outside all {len(cand.ranges)} ranges")
    state.iml_buffer.append(iml)
    state.t_count += 1
    return state


def maybe_update_k(state: AdaptState, cd: float, params: OnlineParams) -> AdaptState:
    """Apply the gate: shrink K after a full stable batch, reset on change."""
    if params.cd_low <= cd <= params.cd_high:
        if state.t_count >= params.t_window and state.iml_buffer:
            state.current_k = max(state.iml_buffer)
            state.iml_buffer.clear()
            state.t_count = 0
    else:
        state.reset(params.initial_k)
    return state


@dataclass
class KTrace:
    """Per-frame adaptation trace."""

    frames: list[int] = field(default_factory=list)
    change_degrees: list[float] = field(default_factory=list)
    ks: list[int] = field(default_factory=list)
    imls: list[int] = field(default_factory=list)
    resets: list[bool] = field(default_factory=list)

    def record(self, frame: int, cd: float, k: int, iml: int, reset: bool) -> None:
        self.frames.append(frame)
        self.change_degrees.append(cd)
        self.ks.append(k)
        self.imls.append(iml)
        self.resets.append(reset)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="\n") as fh:
            writer = csv.writer(fh)
            writer.writerow(["frame", "change_degree", "current_k", "iml", "reset_flag"])
            for f, cd, k, iml, r in zip(
                self.frames, self.change_degrees, self.ks, self.imls, self.resets
            ):
                writer.writerow([f, repr(float(cd)), k, iml, int(r)])


def match_online(
    reference: DescriptorSet,
    query: DescriptorSet,
    base: MatcherParams,
    params: OnlineParams,
    l_reinit: int = 450,
    kernels=None,
    instrument: bool = False,
) -> tuple[MatchResult, KTrace]:
    """Windowed matching with K adapted from recent IMLs, gated by scene change."""
    kernels = kernels or get_kernels()
    engine = _WindowedEngine(reference, query, base, params.num, l_reinit, kernels)
    state = AdaptState(current_k=params.initial_k)
    trace = KTrace()
    instr = Instrumentation(n_speeds=len(engine.speeds)) if instrument else None

    qvals = query.values
    rows = []
    for n in engine.frames:
        if n >= CHANGE_WINDOW + 1:
            cd = change_degree(qvals[n - CHANGE_WINDOW - 1 : n + 1])
        else:
            cd = 1.0  # not enough history: treat as unchanged
        in_gate = params.cd_low <= cd <= params.cd_high
        maybe_update_k(state, cd, params)

        row, cand, reinit, n_cands, new_entries = engine.step(n, state.current_k)
        iml = 0
        if row is not None and in_gate:
            if reinit or cand is None:
                # full sweep found the seed itself; by convention rank 1
                state.iml_buffer.append(1)
                state.t_count += 1
                iml = 1
            else:
                _record_iml_ranges(state, cand, row[1])
                iml = state.iml_buffer[-1]
        if row is not None:
            rows.append(row)
        trace.record(n, cd, state.current_k, iml, not in_gate)
        if instr is not None:
            instr.record(n, n_cands, new_entries, reinit)

    from .accel import _collect

    result = _collect(rows, query.count, reference.count)
    result.instrumentation = instr
    return result, trace
