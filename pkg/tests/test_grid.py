import numpy as np
import pytest
from hypothesis import given, strategies as st

from ltlab.grid import Path, SpaceGrid, TimeGrid, covering_space_grid, make_time_grid, path_range, realized_qv

finite = st.floats(min_value=-1e3, max_value=1e3, allow_nan=False)


def test_time_grid_points():
    np.testing.assert_array_equal(make_time_grid(1.0, 4).points, [0, 0.25, 0.5, 0.75, 1.0])
    np.testing.assert_array_equal(make_time_grid(2.0, 1).points, [0, 2.0])


@pytest.mark.parametrize("t_end, n", [(1.0, 0), (0.0, 4), (-1.0, 3), (float("nan"), 2)])
def test_time_grid_rejects_bad_arguments(t_end, n):
    with pytest.raises(ValueError):
        make_time_grid(t_end, n)


def test_index_of():
    g = make_time_grid(1.0, 4)
    assert g.index_of(0.75) == 3
    with pytest.raises(ValueError):
        g.index_of(0.3)


def test_space_grid_bins_are_left_closed():
    s = SpaceGrid(-1.0, 1.0, 4)
    assert s.delta == 0.5
    np.testing.assert_array_equal(s.bin_index([-1.0, -0.5, -0.25, 0.0, 0.999]), [0, 1, 1, 2, 3])
    assert s.bin_index(1.0) == 4  # x_max belongs to no bin
    with pytest.raises(ValueError):
        SpaceGrid(1.0, 1.0, 3)
    with pytest.raises(ValueError):
        SpaceGrid(0.0, 1.0, 0)


def test_realized_qv_examples():
    np.testing.assert_array_equal(realized_qv(np.full(5, 3.0)), np.zeros(5))
    np.testing.assert_array_equal(realized_qv([0, 1, 0]), [0, 1, 2])
    n = 16
    assert realized_qv(np.linspace(0, 1, n + 1))[-1] == pytest.approx(1 / n, rel=1e-12)
    with pytest.raises(ValueError):
        realized_qv([])


@given(st.lists(finite, min_size=1, max_size=60))
def test_realized_qv_nondecreasing(xs):
    qv = realized_qv(xs)
    assert qv[0] == 0
    assert np.all(np.diff(qv) >= 0)


@given(st.lists(finite, min_size=1, max_size=30), st.lists(finite, min_size=1, max_size=30))
def test_realized_qv_concatenation(a, b):
    whole = realized_qv(a + b)
    left = realized_qv(a)
    # the joining increment belongs to neither segment
    joint = (b[0] - a[-1]) ** 2
    right = realized_qv(b) + left[-1] + joint
    np.testing.assert_allclose(whole[: len(a)], left, rtol=1e-12, atol=1e-9)
    np.testing.assert_allclose(whole[len(a):], right, rtol=1e-9, atol=1e-6)


@given(st.lists(st.floats(-10, 10), min_size=1, max_size=40), st.floats(-100, 100))
def test_realized_qv_translation_invariant(xs, c):
    np.testing.assert_allclose(realized_qv(np.asarray(xs) + c), realized_qv(xs), atol=1e-9)


def test_path_range():
    g = TimeGrid(1.0, 2)
    assert path_range(Path(g, [0.0, 0.0, 0.0], [0, 0, 0])) == (0.0, 0.0)
    p = Path(g, [-1.0, 2.0, 0.0], realized_qv([-1.0, 2.0, 0.0]))
    lo, hi = path_range(p)
    assert (lo, hi) == (-1.0, 2.0) and lo <= hi


def test_path_validates_qv():
    g = TimeGrid(1.0, 2)
    with pytest.raises(ValueError):
        Path(g, [0, 1, 2], [0, 2, 1])
    with pytest.raises(ValueError):
        Path(g, [0, 1, 2], [1, 2, 3])
    with pytest.raises(ValueError):
        Path(g, [0, 1], [0, 1])


def test_covering_space_grid_has_empty_margins():
    s = covering_space_grid(-0.3, 0.7, 0.125, margin_bins=2)
    j = s.bin_index([-0.3, 0.7])
    assert j[0] >= 2 and j[1] <= s.n_bins - 3
    assert s.x_min % 0.125 == 0
