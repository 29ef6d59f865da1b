"""Windowed accelerated matching.

Instead of sweeping every reference frame, each query frame scores only K
matching ranges of num+1 frames centered on the previous frame's K best
candidates. Distance-matrix entries are computed lazily, entry by entry,
only where some candidate's trajectory needs them; a full sweep runs every
l_reinit frames (and as a fallback when the candidate set degenerates) to
bound drift.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .backend import get_kernels
from .descriptor import DescriptorSet
from .errors import QueryTooShort, TooFewCandidates
from .seqmatch import (
    Instrumentation,
    MatcherParams,
    MatchResult,
    SeqScore,
    frame_candidates,
    select_match,
    valid_candidates,
    valid_query_frames,
)


@dataclass(frozen=True)
class AccelParams:
    """Windowed matcher knobs on top of the base matcher parameters.

    ``k`` ranges of ``num``+1 frames each bound the per-frame search to at
    most k*(num+1) candidates; ``l_reinit`` is the full-sweep period.
    """

    base: MatcherParams
    k: int
    num: int
    l_reinit: int = 450

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if self.num < 2 or self.num % 2:
            raise ValueError(f"num must be even and >= 2, got {self.num}")
        if self.l_reinit < 1:
            raise ValueError(f"l_reinit must be >= 1, got {self.l_reinit}")


@dataclass
class CandidateSet:
    """Per-reference-frame flags plus the seed intervals that set them."""

    flags: np.ndarray  # bool per reference frame
    ranges: list[tuple[int, int, int]]  # (seed, lo, hi) in seed-rank order

    @property
    def size(self) -> int:
        return int(self.flags.sum())


def _seed_ranges(seeds: np.ndarray, num: int, ref_count: int) -> CandidateSet:
    flags = np.zeros(ref_count, dtype=bool)
    ranges = []
    half = num // 2
    for s in seeds:
        lo = max(0, int(s) - half)
        hi = min(ref_count - 1, int(s) + half)
        flags[lo : hi + 1] = True
        ranges.append((int(s), lo, hi))
    return CandidateSet(flags, ranges)


def seed_candidates(
    sorted_scores: list[SeqScore], params: AccelParams, ref_count: int
) -> CandidateSet:
    """Flag the intervals around the k best-scored references.

    ``sorted_scores`` must be ascending by score; fewer than k entries is
    an error for this public entry point (the matcher loop itself degrades
    to however many candidates the previous frame produced).
    """
    if len(sorted_scores) < params.k:
        raise TooFewCandidates(
            f"need {params.k} scored candidates, have {len(sorted_scores)}"
        )
    seeds = np.asarray([s.ref_index for s in sorted_scores[: params.k]], dtype=np.intp)
    return _seed_ranges(seeds, params.num, ref_count)


class _LazyMatrix:
    """Distance matrix filled entry-by-entry on demand, with an exact count."""

    def __init__(self, reference: DescriptorSet, query: DescriptorSet, kernels) -> None:
        self.ref = reference.values
        self.query = query.values
        self.data = np.zeros((reference.count, query.count), dtype=np.float32)
        self.mask = np.zeros((reference.count, query.count), dtype=bool)
        self.kernels = kernels
        self.entries_computed = 0

    def ensure(self, r_idx: np.ndarray, c_idx: np.ndarray) -> int:
        """Compute any missing (r, c) entries; returns how many were new."""
        missing = ~self.mask[r_idx, c_idx]
        if not missing.any():
            return 0
        flat = r_idx[missing] * self.data.shape[1] + c_idx[missing]
        flat = np.unique(flat)
        rr = (flat // self.data.shape[1]).astype(np.intp)
        cc = (flat % self.data.shape[1]).astype(np.intp)
        self.kernels.dist_entries(self.ref, self.query, self.data, rr, cc)
        self.mask[rr, cc] = True
        self.entries_computed += len(rr)
        return len(rr)


def _trajectory_pairs(
    qs: np.ndarray, n: int, ds: int, speeds: np.ndarray, rows: int
) -> tuple[np.ndarray, np.ndarray]:
    """All (row, col) matrix entries touched when scoring ``qs`` at frame n."""
    ds2 = ds // 2
    offs = np.arange(-ds2, ds2 + 1, dtype=np.int64)
    pos = qs.astype(np.float64)[:, None] + offs[None, :]
    cols_w = n + offs
    r_parts = []
    for v in speeds:
        x = float(v) * pos
        f = np.floor(x)
        d = x - f
        r = f.astype(np.int64) + (d > 0.5) + ((d == 0.5) & (x > 0))
        r_parts.append(np.clip(r, 0, rows - 1))
    r_all = np.concatenate([r.reshape(-1) for r in r_parts]).astype(np.intp)
    c_all = np.tile(np.broadcast_to(cols_w, pos.shape).reshape(-1), len(speeds)).astype(np.intp)
    return r_all, c_all


class _WindowedEngine:
    """Per-frame state machine shared by the fixed-K and adaptive-K matchers."""

    def __init__(
        self,
        reference: DescriptorSet,
        query: DescriptorSet,
        base: MatcherParams,
        num: int,
        l_reinit: int,
        kernels,
    ) -> None:
        self.base = base
        self.num = num
        self.l_reinit = l_reinit
        self.kernels = kernels
        self.ds = base.ds
        self.speeds = base.speed_grid()
        self.rows = reference.count
        self.frames = valid_query_frames(query.count, self.ds)
        if len(self.frames) == 0:
            raise QueryTooShort(
                f"query has {query.count} frames, none with a full ds={self.ds} window"
            )
        self.all_candidates = valid_candidates(reference.count, self.ds)
        if len(self.all_candidates) == 0:
            raise QueryTooShort(
                f"reference has {reference.count} frames, no full ds={self.ds} window"
            )
        self.first = self.frames.start
        self.lazy = _LazyMatrix(reference, query, kernels)
        self.prev_sorted_q: np.ndarray | None = None

    def step(self, n: int, k: int):
        """Match frame n against k ranges (or everything on a reinit frame).

        Returns (row tuple or None, candidate set or None, reinit flag,
        candidates scored, new matrix entries).
        """
        reinit = (n - self.first) % self.l_reinit == 0 or self.prev_sorted_q is None
        cand = None
        qs = np.zeros(0, dtype=np.intp)
        if not reinit:
            k_eff = min(k, len(self.prev_sorted_q))
            cand = _seed_ranges(self.prev_sorted_q[:k_eff], self.num, self.rows)
            qs = np.flatnonzero(cand.flags).astype(np.intp)
            qs = qs[(qs >= self.all_candidates[0]) & (qs <= self.all_candidates[-1])]
            qs = frame_candidates(qs, n, self.base)
            if len(qs) == 0:
                reinit = True  # seeds collapsed into the boundary; fall back
                cand = None
        if reinit:
            qs = frame_candidates(self.all_candidates, n, self.base)
            if len(qs) == 0:
                self.prev_sorted_q = None
                return None, None, True, 0, 0

        r_idx, c_idx = _trajectory_pairs(qs, n, self.ds, self.speeds, self.rows)
        new_entries = self.lazy.ensure(r_idx, c_idx)
        scores, vidx = self.kernels.score_candidates(
            self.lazy.data, n, qs, self.speeds, self.ds
        )
        best_q, best, second, conf, speed = select_match(
            qs, scores, vidx, self.speeds, self.base.r_window
        )
        order = np.lexsort((qs, scores))
        self.prev_sorted_q = qs[order]
        row = (n, best_q, best, second, conf, speed)
        return row, cand, reinit, len(qs), new_entries


def _collect(rows: list, query_count: int, ref_count: int) -> MatchResult:
    if rows:
        qi, br, bs, ss, cf, sp = zip(*rows)
    else:
        qi = br = bs = ss = cf = sp = ()
    return MatchResult(
        np.asarray(qi, dtype=np.int64),
        np.asarray(br, dtype=np.int64),
        np.asarray(bs, dtype=np.float64),
        np.asarray(ss, dtype=np.float64),
        np.asarray(cf, dtype=np.float64),
        np.asarray(sp, dtype=np.float64),
        query_count=query_count,
        ref_count=ref_count,
    )


def match_accelerated(
    reference: DescriptorSet,
    query: DescriptorSet,
    params: AccelParams,
    kernels=None,
    instrument: bool = False,
) -> MatchResult:
    """Windowed matching with a fixed number of ranges per frame."""
    kernels = kernels or get_kernels()
    engine = _WindowedEngine(
        reference, query, params.base, params.num, params.l_reinit, kernels
    )
    instr = Instrumentation(n_speeds=len(engine.speeds)) if instrument else None
    rows = []
    for n in engine.frames:
        row, _, reinit, n_cands, new_entries = engine.step(n, params.k)
        if row is not None:
            rows.append(row)
        if instr is not None:
            instr.record(n, n_cands, new_entries, reinit)
    result = _collect(rows, query.count, reference.count)
    result.instrumentation = instr
    return result
