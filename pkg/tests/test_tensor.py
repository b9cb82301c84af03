import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import naive_contract
from tnrenorm.tensor import (TINY, DimensionMismatchError, NormState,
                             contract, fill_gaussian, sum_of_entries,
                             sum_of_squares)


def test_contract_identity():
    out = contract(np.eye(2), [1], np.array([3.0, 4.0]), [0])
    np.testing.assert_array_equal(out, [3.0, 4.0])


def test_contract_empty_axes_is_outer_product():
    out = contract(np.array([1.0, 2.0]), [], np.array([3.0, 4.0]), [])
    np.testing.assert_array_equal(out, [[3.0, 4.0], [6.0, 8.0]])


def test_contract_all_ones_matches_loop_oracle():
    a, b = np.ones((2, 3)), np.ones((3, 2))
    expected = naive_contract(a, [1], b, [0])
    np.testing.assert_array_equal(expected, np.full((2, 2), 3.0))
    np.testing.assert_array_equal(contract(a, [1], b, [0]), expected)


def test_contract_free_axes_order():
    a = np.zeros((2, 5, 3))
    b = np.zeros((7, 5, 4))
    assert contract(a, [1], b, [1]).shape == (2, 3, 7, 4)


def test_contract_errors():
    with pytest.raises(DimensionMismatchError):
        contract(np.ones((2, 3)), [1], np.ones((2, 2)), [0])
    with pytest.raises(ValueError, match="repeated"):
        contract(np.ones((2, 2)), [0, 0], np.ones((2, 2)), [0, 1])
    with pytest.raises(ValueError, match="length"):
        contract(np.ones((2, 2)), [0], np.ones((2, 2)), [0, 1])


@st.composite
def contraction_case(draw):
    """Two tensors with <= 6 axes in total, extents <= 4, some paired axes."""
    total = draw(st.integers(0, 6))
    nd_a = draw(st.integers(0, total))
    nd_b = total - nd_a
    n_pair = draw(st.integers(0, min(nd_a, nd_b)))
    axes_a = draw(st.permutations(range(nd_a)))[:n_pair]
    axes_b = draw(st.permutations(range(nd_b)))[:n_pair]
    shape_a = [draw(st.integers(1, 4)) for _ in range(nd_a)]
    shape_b = [draw(st.integers(1, 4)) for _ in range(nd_b)]
    for ia, ib in zip(axes_a, axes_b):
        shape_b[ib] = shape_a[ia]
    seed = draw(st.integers(0, 2**31))
    rng = np.random.default_rng(seed)
    return (rng.normal(size=shape_a), list(axes_a),
            rng.normal(size=shape_b), list(axes_b))


@settings(max_examples=200, deadline=None)
@given(contraction_case())
def test_contract_matches_nested_loops(case):
    a, axes_a, b, axes_b = case
    np.testing.assert_allclose(contract(a, axes_a, b, axes_b),
                               naive_contract(a, axes_a, b, axes_b),
                               rtol=1e-12, atol=1e-12)


@settings(max_examples=100, deadline=None)
@given(contraction_case(), st.floats(-10, 10).filter(lambda x: abs(x) > 1e-3))
def test_contract_is_bilinear(case, alpha):
    a, axes_a, b, axes_b = case
    np.testing.assert_allclose(contract(alpha * a, axes_a, b, axes_b),
                               alpha * contract(a, axes_a, b, axes_b),
                               rtol=1e-12, atol=1e-12)


def test_fill_gaussian_zero_variance():
    np.testing.assert_array_equal(fill_gaussian([4], 1.0, 0.0, seed=0),
                                  [1.0, 1.0, 1.0, 1.0])


def test_fill_gaussian_deterministic():
    a = fill_gaussian([3, 5], 0.2, 1.3, seed=11)
    b = fill_gaussian([3, 5], 0.2, 1.3, seed=11)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, fill_gaussian([3, 5], 0.2, 1.3, seed=12))


def test_fill_gaussian_moments():
    n = 10_000
    t = fill_gaussian([n], 1.0, 0.5, seed=7)
    tol = 4 / np.sqrt(n)
    assert abs(t.mean() - 1.0) <= tol
    assert abs(t.std() - 0.5) <= tol


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**31), st.floats(-2, 2), st.floats(0, 3))
def test_fill_gaussian_positive_flag(seed, mean, std):
    assert np.all(fill_gaussian([50], mean, std, seed, positive=True) >= 0)


def test_fill_gaussian_rejects_bad_args():
    with pytest.raises(ValueError):
        fill_gaussian([], 0.0, 1.0)
    with pytest.raises(ValueError):
        fill_gaussian([3], 0.0, -1.0)


def test_sum_of_squares_cases():
    assert sum_of_squares(np.array([3.0, 4.0])).value == 25.0
    assert sum_of_squares(np.array([1e200, 1e200])).state is NormState.OVERFLOW
    assert sum_of_squares(np.array([1e-200, 0.0])).state is NormState.UNDERFLOW


def test_sum_of_squares_subnormal_is_underflow():
    assert sum_of_squares(np.array([np.sqrt(TINY) / 2])).state is NormState.UNDERFLOW


def test_sum_of_entries_cases():
    assert sum_of_entries(np.array([1.0, 2.0, 3.0])).value == 6.0
    assert sum_of_entries(np.array([1e308, 1e308])).state is NormState.OVERFLOW
    zero = sum_of_entries(np.array([1.0, -1.0]))
    assert zero.state is NormState.UNDERFLOW
    negative = sum_of_entries(np.array([1.0, -3.0]))
    assert negative.state is NormState.UNDERFLOW and negative.negative


def test_nan_maps_to_overflow():
    assert sum_of_entries(np.array([np.inf, -np.inf])).state is NormState.OVERFLOW


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 4).flatmap(
    lambda nd: st.tuples(st.lists(st.integers(1, 4), min_size=nd, max_size=nd),
                         st.permutations(range(nd)), st.integers(0, 2**31))))
def test_sum_of_squares_permutation_invariant(case):
    shape, perm, seed = case
    t = np.random.default_rng(seed).normal(size=shape)
    a = sum_of_squares(t).value
    b = sum_of_squares(np.transpose(t, perm)).value
    assert abs(a - b) <= 1e-12 * a
