import numpy as np
import pytest

from seqlcd.backend import available_backends, get_kernels
from seqlcd.descriptor import DescriptorSet
from seqlcd.diffmatrix import (
    build_columns,
    build_full,
    entry,
    load_matrix,
    save_matrix,
)
from seqlcd.errors import DimMismatch, RangeOutOfBounds, UncomputedEntry

from oracles import naive_distance_matrix, unit_rows


@pytest.fixture
def self_set():
    rng = np.random.default_rng(10)
    return DescriptorSet(unit_rows(rng, 12, 6))


def test_orthonormal_pair():
    e = np.eye(2, dtype=np.float32)
    dset = DescriptorSet(e)
    m = build_full(dset, dset)
    expected = np.asarray([[0.0, np.sqrt(2)], [np.sqrt(2), 0.0]], dtype=np.float32)
    assert np.array_equal(m.data, expected)


def test_identical_sets_zero_diagonal_symmetric(self_set):
    m = build_full(self_set, self_set)
    assert np.abs(np.diag(m.data)).max() <= 1e-9
    assert np.abs(m.data - m.data.T).max() <= 1e-9


def test_matches_naive_oracle():
    rng = np.random.default_rng(11)
    ref = DescriptorSet(unit_rows(rng, 10, 7))
    query = DescriptorSet(unit_rows(rng, 10, 7))
    m = build_full(ref, query)
    assert np.array_equal(m.data, naive_distance_matrix(ref.values, query.values))


def test_unit_descriptor_entries_bounded(self_set):
    m = build_full(self_set, self_set)
    assert float(m.data.max()) <= 2.0 + 1e-6
    assert float(m.data.min()) >= 0.0


def test_triangle_inequality(self_set):
    m = build_full(self_set, self_set).data.astype(np.float64)
    n = m.shape[0]
    for i in range(n):
        for j in range(n):
            for k in range(n):
                assert m[i, k] <= m[i, j] + m[j, k] + 1e-6


def test_dim_mismatch():
    a = DescriptorSet(np.eye(2, 3, dtype=np.float32))
    b = DescriptorSet(np.eye(2, 4, dtype=np.float32))
    with pytest.raises(DimMismatch):
        build_full(a, b)


class TestBuildColumns:
    def test_initialization_window(self, self_set):
        ds = 10
        m = build_columns(self_set, self_set, range(0, ds + 1))
        assert list(m.computed_cols) == list(range(ds + 1))
        assert not m.computed[ds + 1 :].any()

    def test_empty_range_noop(self, self_set):
        m = build_columns(self_set, self_set, range(3, 3))
        assert len(m.computed_cols) == 0

    def test_recompute_identical(self, self_set):
        m = build_columns(self_set, self_set, range(0, 4))
        snapshot = m.data.copy()
        build_columns(self_set, self_set, range(0, 4), existing=m)
        assert np.array_equal(m.data, snapshot)

    def test_complement_equals_full(self, self_set):
        full = build_full(self_set, self_set)
        part = build_columns(self_set, self_set, range(0, 5))
        part = build_columns(self_set, self_set, range(5, self_set.count), existing=part)
        assert part.all_computed()
        assert np.array_equal(part.data, full.data)

    def test_out_of_bounds(self, self_set):
        with pytest.raises(RangeOutOfBounds):
            build_columns(self_set, self_set, range(0, self_set.count + 1))


class TestEntry:
    def test_computed_zero(self, self_set):
        m = build_full(self_set, self_set)
        assert entry(m, 0, 0) == 0.0

    def test_uncomputed(self, self_set):
        m = build_columns(self_set, self_set, range(0, 2))
        with pytest.raises(UncomputedEntry):
            entry(m, 0, 5)

    def test_out_of_bounds(self, self_set):
        m = build_full(self_set, self_set)
        with pytest.raises(RangeOutOfBounds):
            entry(m, 0, self_set.count)
        with pytest.raises(RangeOutOfBounds):
            entry(m, -1, 0)


def test_thread_count_invariance():
    rng = np.random.default_rng(12)
    ref = DescriptorSet(unit_rows(rng, 60, 16))
    query = DescriptorSet(unit_rows(rng, 50, 16))
    single = build_full(ref, query, threads=1)
    for threads in (2, 3, 7):
        multi = build_full(ref, query, threads=threads)
        assert np.array_equal(single.data, multi.data)


@pytest.mark.parametrize("backend_name", available_backends())
def test_rectangular_shape(backend_name):
    rng = np.random.default_rng(13)
    ref = DescriptorSet(unit_rows(rng, 9, 5))
    query = DescriptorSet(unit_rows(rng, 4, 5))
    m = build_full(ref, query, kernels=get_kernels(backend_name))
    assert m.data.shape == (9, 4)
    assert m.all_computed()


def test_matrix_file_round_trip(tmp_path, self_set):
    m = build_columns(self_set, self_set, range(0, 7))
    path = tmp_path / "m.sqdm"
    save_matrix(m, path)
    back = load_matrix(path)
    assert np.array_equal(back.data, m.data)
    assert np.array_equal(back.computed, m.computed)
