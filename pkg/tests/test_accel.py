import numpy as np
import pytest

import seqlcd as sl
from seqlcd.accel import _WindowedEngine, seed_candidates
from seqlcd.errors import TooFewCandidates
from seqlcd.seqmatch import SeqScore

from oracles import unit_rows


def _scores(seeds):
    return [SeqScore(query_index=0, ref_index=s, speed=1.0, score=float(i)) for i, s in enumerate(seeds)]


class TestSeedCandidates:
    def test_overlapping_ranges_shrink(self):
        params = sl.AccelParams(base=sl.MatcherParams(ds=4), k=2, num=2)
        cand = seed_candidates(_scores([10, 11]), params, ref_count=100)
        assert set(np.flatnonzero(cand.flags)) == {9, 10, 11, 12}
        assert cand.size == 4 < 2 * 3

    def test_boundary_clamp(self):
        params = sl.AccelParams(base=sl.MatcherParams(ds=4), k=1, num=2)
        cand = seed_candidates(_scores([0]), params, ref_count=100)
        assert set(np.flatnonzero(cand.flags)) == {0, 1}

    def test_disjoint_ranges_full_size(self):
        params = sl.AccelParams(base=sl.MatcherParams(ds=4), k=2, num=2)
        cand = seed_candidates(_scores([10, 50]), params, ref_count=100)
        assert set(np.flatnonzero(cand.flags)) == {9, 10, 11, 49, 50, 51}
        assert cand.size == 2 * 3

    def test_too_few(self):
        params = sl.AccelParams(base=sl.MatcherParams(ds=4), k=3, num=2)
        with pytest.raises(TooFewCandidates):
            seed_candidates(_scores([5]), params, ref_count=100)

    def test_ranges_keep_seed_order(self):
        params = sl.AccelParams(base=sl.MatcherParams(ds=4), k=2, num=4)
        cand = seed_candidates(_scores([30, 7]), params, ref_count=100)
        assert [r[0] for r in cand.ranges] == [30, 7]


@pytest.fixture(scope="module")
def aligned_pair():
    cfg = sl.SynthConfig(n_frames=260, dim=16, condition_noise=0.08, seed=91)
    return sl.generate_pair(cfg)


class TestMatchAccelerated:
    def test_full_coverage_equals_match_all(self):
        rng = np.random.default_rng(40)
        ref = sl.DescriptorSet(unit_rows(rng, 70, 8))
        query = sl.DescriptorSet(unit_rows(rng, 60, 8))
        base = sl.MatcherParams(ds=4)
        full = sl.match_all(ref, query, base)
        acc = sl.match_accelerated(
            ref, query, sl.AccelParams(base=base, k=70, num=140, l_reinit=450)
        )
        assert np.array_equal(acc.best_refs, full.best_refs)
        assert np.array_equal(acc.best_scores, full.best_scores)
        assert np.array_equal(acc.speeds, full.speeds)

    def test_full_coverage_with_recent_template_exclusion(self):
        rng = np.random.default_rng(44)
        dset = sl.DescriptorSet(unit_rows(rng, 90, 8))
        base = sl.MatcherParams(ds=10, same_traversal=True, r_window=10)
        full = sl.match_all(dset, dset, base)
        acc = sl.match_accelerated(
            dset, dset, sl.AccelParams(base=base, k=90, num=180, l_reinit=37)
        )
        assert np.array_equal(acc.best_refs, full.best_refs)
        assert np.array_equal(acc.best_scores, full.best_scores)
        assert (np.abs(full.best_refs - full.query_indices) > 10).all()

    def test_candidate_bound_per_frame(self, aligned_pair):
        ref, query, _ = aligned_pair
        params = sl.AccelParams(base=sl.MatcherParams(ds=10), k=4, num=6, l_reinit=100)
        res = sl.match_accelerated(ref, query, params, instrument=True)
        instr = sl.count_distance_evals(res)
        cands = np.asarray(instr.candidates_scored)
        reinit = np.asarray(instr.reinit_flags)
        assert cands[~reinit].max() <= 4 * 7
        assert reinit[0]  # bootstrap frame sweeps everything

    def test_locality_keeps_truth_in_candidates(self, aligned_pair):
        # when the previous frame matched correctly, the next true match
        # sits inside the seeded ranges
        ref, query, gt = aligned_pair
        base = sl.MatcherParams(ds=10)
        params = sl.AccelParams(base=base, k=4, num=6, l_reinit=10 ** 9)
        engine = _WindowedEngine(ref, query, base, params.num, params.l_reinit, sl.get_kernels())
        prev_correct = False
        checked = 0
        for n in engine.frames:
            row, cand, reinit, _, _ = engine.step(n, params.k)
            if not reinit and prev_correct and cand is not None:
                truth = gt.mapping[n]
                assert any(lo <= truth <= hi for _, lo, hi in cand.ranges)
                checked += 1
            prev_correct = row is not None and abs(row[1] - gt.mapping[n]) <= 1
        assert checked > 100

    def test_work_reduction_counts(self, aligned_pair):
        ref, query, _ = aligned_pair
        base = sl.MatcherParams(ds=10)
        full = sl.match_all(ref, query, base, instrument=True)
        acc = sl.match_accelerated(
            ref, query, sl.AccelParams(base=base, k=10, num=16), instrument=True
        )
        assert acc.instrumentation.total_work < 0.3 * full.instrumentation.total_work

    def test_reinit_schedule(self, aligned_pair):
        ref, query, _ = aligned_pair
        params = sl.AccelParams(base=sl.MatcherParams(ds=10), k=4, num=6, l_reinit=50)
        res = sl.match_accelerated(ref, query, params, instrument=True)
        instr = sl.count_distance_evals(res)
        flagged = [f for f, r in zip(instr.frames, instr.reinit_flags) if r]
        assert flagged == [5, 55, 105, 155, 205]

    def test_degenerate_seeds_fall_back_to_sweep(self):
        rng = np.random.default_rng(41)
        dset = sl.DescriptorSet(unit_rows(rng, 40, 8))
        base = sl.MatcherParams(ds=4, same_traversal=True, r_window=5)
        engine = _WindowedEngine(dset, dset, base, 2, 10 ** 9, sl.get_kernels())
        first = engine.frames.start
        engine.step(first, 1)
        # plant seeds inside the next frame's exclusion zone
        engine.prev_sorted_q = np.asarray([first + 1], dtype=np.intp)
        row, cand, reinit, n_cands, _ = engine.step(first + 1, 1)
        assert reinit
        assert row is not None


class TestInstrumentation:
    def test_full_sweep_closed_form(self):
        rng = np.random.default_rng(42)
        dset = sl.DescriptorSet(unit_rows(rng, 200, 4))
        res = sl.match_all(dset, dset, sl.MatcherParams(ds=10), instrument=True)
        instr = sl.count_distance_evals(res)
        assert all(c == 190 for c in instr.candidates_scored)
        assert instr.total_evals == 190 * 190 * 5
        assert instr.total_entries == 200 * 200

    def test_accel_eval_counts(self, aligned_pair):
        ref, query, _ = aligned_pair
        params = sl.AccelParams(base=sl.MatcherParams(ds=10), k=4, num=6)
        res = sl.match_accelerated(ref, query, params, instrument=True)
        instr = sl.count_distance_evals(res)
        assert instr.total_evals == 5 * sum(instr.candidates_scored)
        assert instr.total_entries == sum(instr.entries_computed)
        # lazy evaluation never computes the whole matrix
        assert instr.total_entries < ref.count * query.count

    def test_zero_frames_zero_counts(self):
        instr = sl.Instrumentation(n_speeds=5)
        assert instr.total_evals == 0
        assert instr.total_entries == 0
        assert instr.total_work == 0

    def test_missing_instrumentation_raises(self, aligned_pair):
        ref, query, _ = aligned_pair
        res = sl.match_accelerated(
            ref, query, sl.AccelParams(base=sl.MatcherParams(ds=10), k=2, num=4)
        )
        with pytest.raises(ValueError):
            sl.count_distance_evals(res)

    def test_csv_format(self, tmp_path, aligned_pair):
        ref, query, _ = aligned_pair
        res = sl.match_accelerated(
            ref,
            query,
            sl.AccelParams(base=sl.MatcherParams(ds=10), k=2, num=4),
            instrument=True,
        )
        path = tmp_path / "instr.csv"
        res.instrumentation.to_csv(path)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "frame,candidates_scored,entries_computed,reinit_flag"
        assert len(lines) == len(res.instrumentation.frames) + 1


@pytest.mark.parametrize(
    "kwargs",
    [
        {"k": 0, "num": 4},
        {"k": 2, "num": 3},
        {"k": 2, "num": 0},
        {"k": 2, "num": 4, "l_reinit": 0},
    ],
)
def test_invalid_params(kwargs):
    with pytest.raises(ValueError):
        sl.AccelParams(base=sl.MatcherParams(ds=4), **kwargs)
