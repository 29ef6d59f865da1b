import numpy as np
import pytest

import seqlcd as sl
from seqlcd.errors import InsufficientHistory, NotInAnyRange
from seqlcd.online import AdaptState, change_degree, maybe_update_k, record_iml
from seqlcd.seqmatch import SeqScore
from seqlcd.synth import _pair_rotation

from oracles import unit_rows


def _drift(n, dim, eps=0.05, noise=0.0, seed=0, jump_at=None, jump_frac=0.0):
    rng = np.random.default_rng(seed)
    i = np.arange(n)
    base = np.zeros((n, dim))
    base[:, 0] = np.cos(i * eps)
    base[:, 1] = np.sin(i * eps)
    q = base.copy()
    if jump_at is not None:
        q[jump_at:] = _pair_rotation(q[jump_at:], jump_frac)
    if noise > 0:
        g = rng.standard_normal((n, dim))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        q = q + noise * g
        q /= np.linalg.norm(q, axis=1, keepdims=True)
    return base, q


class TestChangeDegree:
    def test_identical_frames_degenerate_to_one(self):
        hist = np.tile(sl.normalize(np.ones(6)).values, (12, 1))
        assert change_degree(hist) == 1.0

    def test_constant_drift_near_one(self):
        base, _ = _drift(12, 8)
        assert change_degree(base) == pytest.approx(1.0, abs=0.05)

    def test_jump_exceeds_gate(self):
        base, q = _drift(12, 8, jump_at=11, jump_frac=0.4)
        assert change_degree(q) > 1.1

    def test_insufficient_history(self):
        base, _ = _drift(11, 8)
        with pytest.raises(InsufficientHistory):
            change_degree(base)

    def test_scale_invariance(self):
        rng = np.random.default_rng(50)
        hist = rng.standard_normal((14, 10))
        a = change_degree(hist)
        b = change_degree(hist * 7.3)
        assert abs(a - b) <= 1e-9


def _sorted_scores(seeds):
    return [SeqScore(query_index=0, ref_index=s, speed=1.0, score=float(i)) for i, s in enumerate(seeds)]


class TestRecordIml:
    def test_first_range_only(self):
        state = AdaptState(current_k=3)
        params = sl.OnlineParams(initial_k=3, num=4)
        record_iml(state, _sorted_scores([10, 40, 70]), chosen_ref=11, params=params, ref_count=100)
        assert state.iml_buffer == [1]
        assert state.t_count == 1

    def test_overlapping_ranges_take_smallest(self):
        state = AdaptState(current_k=3)
        params = sl.OnlineParams(initial_k=3, num=4)
        # ranges: [8,12], [18,22], [20,24] -> 21 sits in ranks 2 and 3
        record_iml(state, _sorted_scores([10, 20, 22]), chosen_ref=21, params=params, ref_count=100)
        assert state.iml_buffer == [2]

    def test_not_in_any_range(self):
        state = AdaptState(current_k=2)
        params = sl.OnlineParams(initial_k=2, num=4)
        with pytest.raises(NotInAnyRange):
            record_iml(state, _sorted_scores([10, 20]), chosen_ref=50, params=params, ref_count=100)


class TestMaybeUpdateK:
    def test_batch_complete_takes_max(self):
        params = sl.OnlineParams(initial_k=30, num=4, t_window=10)
        state = AdaptState(current_k=30, iml_buffer=[1, 2, 3, 1, 1, 2, 1, 1, 3, 2], t_count=10)
        maybe_update_k(state, cd=1.0, params=params)
        assert state.current_k == 3
        assert state.iml_buffer == []
        assert state.t_count == 0

    def test_gate_exit_resets(self):
        params = sl.OnlineParams(initial_k=30, num=4)
        state = AdaptState(current_k=4, iml_buffer=[1, 2], t_count=2)
        maybe_update_k(state, cd=1.5, params=params)
        assert state.current_k == 30
        assert state.iml_buffer == []
        assert state.t_count == 0

    def test_partial_batch_unchanged(self):
        params = sl.OnlineParams(initial_k=30, num=4, t_window=10)
        state = AdaptState(current_k=7, iml_buffer=[1, 1, 1, 1], t_count=4)
        maybe_update_k(state, cd=1.0, params=params)
        assert state.current_k == 7
        assert state.iml_buffer == [1, 1, 1, 1]


class TestMatchOnline:
    def test_stationary_scene_converges(self):
        ref, q = _drift(120, 32, noise=0.01, seed=5)
        _, trace = sl.match_online(
            sl.DescriptorSet(ref.astype(np.float32)),
            sl.DescriptorSet(q.astype(np.float32)),
            sl.MatcherParams(ds=10),
            sl.OnlineParams(initial_k=30, num=16),
        )
        ks = np.asarray(trace.ks)
        assert not any(trace.resets)
        assert ks[30:].max() <= 5
        # K never exceeds the initial value and never increases between resets
        assert ks.max() <= 30
        assert (np.diff(ks) <= 0).all()

    def test_jump_resets_k(self):
        ref, q = _drift(120, 32, noise=0.01, seed=5, jump_at=60, jump_frac=0.3)
        _, trace = sl.match_online(
            sl.DescriptorSet(ref.astype(np.float32)),
            sl.DescriptorSet(q.astype(np.float32)),
            sl.MatcherParams(ds=10),
            sl.OnlineParams(initial_k=30, num=16),
        )
        pos = trace.frames.index(60)
        cd = trace.change_degrees[pos]
        assert cd > 1.1 or cd < 0.9
        assert trace.resets[pos]
        assert trace.ks[pos] == 30
        assert trace.ks[pos - 1] <= 5

    def test_adaptation_disabled_equals_fixed_k(self):
        rng = np.random.default_rng(51)
        ref = sl.DescriptorSet(unit_rows(rng, 90, 12))
        query = sl.DescriptorSet(unit_rows(rng, 90, 12))
        base = sl.MatcherParams(ds=4)
        on, _ = sl.match_online(
            ref,
            query,
            base,
            sl.OnlineParams(initial_k=6, num=8, t_window=10 ** 9, cd_low=1e-12, cd_high=1e12),
            l_reinit=35,
        )
        fixed = sl.match_accelerated(
            ref, query, sl.AccelParams(base=base, k=6, num=8, l_reinit=35)
        )
        assert np.array_equal(on.best_refs, fixed.best_refs)
        assert np.array_equal(on.best_scores, fixed.best_scores)
        assert np.array_equal(on.confidences, fixed.confidences)
        assert np.array_equal(on.speeds, fixed.speeds)

    def test_k_converges_after_exactly_one_batch(self):
        ref, q = _drift(80, 16, noise=0.005, seed=6)
        params = sl.OnlineParams(initial_k=20, num=16, t_window=10)
        _, trace = sl.match_online(
            sl.DescriptorSet(ref.astype(np.float32)),
            sl.DescriptorSet(q.astype(np.float32)),
            sl.MatcherParams(ds=10),
            params,
        )
        ks = trace.ks
        assert ks[: params.t_window] == [20] * params.t_window
        assert ks[params.t_window] == 1

    def test_accuracy_close_to_fixed_k(self):
        cfg = sl.SynthConfig(
            n_frames=400, dim=32, condition_noise=0.1, viewpoint_shift=0.125, seed=77
        )
        ref, query, gt = sl.generate_pair(cfg)
        base = sl.MatcherParams(ds=80)
        online, _ = sl.match_online(
            ref, query, base, sl.OnlineParams(initial_k=30, num=16)
        )
        fixed = sl.match_accelerated(ref, query, sl.AccelParams(base=base, k=10, num=16))
        r_on = sl.pr_curve(online, gt).max_recall_at_full_precision
        r_fix = sl.pr_curve(fixed, gt).max_recall_at_full_precision
        assert abs(r_on - r_fix) <= 0.05

    def test_ktrace_csv(self, tmp_path):
        ref, q = _drift(60, 8, noise=0.01, seed=7)
        _, trace = sl.match_online(
            sl.DescriptorSet(ref.astype(np.float32)),
            sl.DescriptorSet(q.astype(np.float32)),
            sl.MatcherParams(ds=10),
            sl.OnlineParams(initial_k=5, num=4),
        )
        path = tmp_path / "trace.csv"
        trace.to_csv(path)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "frame,change_degree,current_k,iml,reset_flag"
        assert len(lines) == len(trace.frames) + 1


@pytest.mark.parametrize(
    "kwargs",
    [
        {"initial_k": 0},
        {"num": 3},
        {"t_window": 0},
        {"cd_low": 0.0},
        {"cd_low": 1.2, "cd_high": 1.1},
    ],
)
def test_invalid_params(kwargs):
    with pytest.raises(ValueError):
        sl.OnlineParams(**kwargs)
