import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nllrtc.exceptions import CongruenceError, ShapeError
from nllrtc.rearrange import (ImageStack, WorkingTensor, from_working, rearrange_forward,
                              rearrange_inverse, to_working)


def stack_of(values, value_range=None):
    values = np.asarray(values, dtype=float)
    return ImageStack(values, value_range or max(values.max(), 1.0))


def test_single_pixel_time_series():
    values = np.array([5.0, 7.0, 9.0]).reshape(1, 1, 1, 3)
    w = rearrange_forward(stack_of(values), np.ones_like(values))
    assert w.values.shape == (1, 3, 1)
    np.testing.assert_array_equal(w.values[0, :, 0], [5.0, 7.0, 9.0])


def test_interleave_oracle_small():
    # 0-based: (j, l) -> v = j * t + l
    m, n, b, t = 2, 2, 1, 2
    values = np.arange(m * n * b * t, dtype=float).reshape(m, n, b, t) + 1
    w = rearrange_forward(stack_of(values), np.ones((m, n, b, t)))
    order = [(0, 0), (0, 1), (1, 0), (1, 1)]
    for i in range(m):
        for v, (j, l) in enumerate(order):
            assert w.values[i, v, 0] == values[i, j, 0, l]


def test_roundtrip_random_stack(rng):
    values = rng.random((8, 6, 3, 4)) * 255
    mask = (rng.random((8, 6, 3, 4)) > 0.3).astype(np.uint8)
    stack, back = rearrange_inverse(rearrange_forward(ImageStack(values, 255), mask))
    np.testing.assert_array_equal(stack.values, values)
    np.testing.assert_array_equal(back, mask)


def test_inverse_of_zero_working_tensor():
    w = WorkingTensor(np.zeros((3, 8, 2)), np.ones((3, 8, 2), dtype=np.uint8), (3, 4, 2, 2))
    stack, mask = rearrange_inverse(w)
    assert stack.shape == (3, 4, 2, 2) and not stack.values.any()


def test_inverse_single_entry():
    # 1-based W(2, 5, 1) with n = 3, t = 2 is Y(2, 3, 1, 1)
    w = np.zeros((2, 6, 1))
    w[1, 4, 0] = 1.0
    y = from_working(w, (2, 3, 1, 2))
    assert y[1, 2, 0, 0] == 1.0 and y.sum() == 1.0


def test_inconsistent_provenance():
    with pytest.raises(ShapeError):
        from_working(np.zeros((2, 6, 1)), (2, 4, 1, 2))


def test_mask_congruence():
    with pytest.raises(CongruenceError):
        rearrange_forward(ImageStack(np.zeros((2, 2, 1, 2))), np.ones((2, 2, 1, 3)))


@pytest.mark.parametrize("shape", [(2, 3, 2, 2), (3, 2, 1, 4), (1, 4, 3, 3)])
def test_index_map_is_bijection(shape):
    m, n, b, t = shape
    labels = np.arange(np.prod(shape)).reshape(shape)
    w = to_working(labels, t)
    seen = set()
    for i, j, k, l in itertools.product(range(m), range(n), range(b), range(t)):
        u, v, c = i, j * t + l, k
        assert w[u, v, c] == labels[i, j, k, l]
        seen.add((u, v, c))
    assert len(seen) == w.size


def test_mask_and_values_share_index_map(rng):
    values = rng.random((4, 3, 2, 2))
    mask = (rng.random(values.shape) > 0.5).astype(np.uint8)
    w = rearrange_forward(ImageStack(values, 1.0), mask)
    np.testing.assert_array_equal(w.values * w.mask, to_working(values * mask, 2))


def test_same_location_times_are_adjacent(rng):
    values = rng.random((3, 5, 2, 4))
    w = to_working(values, 4)
    for j in range(5):
        for l in range(3):
            np.testing.assert_array_equal(w[:, j * 4 + l, :], values[:, j, :, l])
            np.testing.assert_array_equal(w[:, j * 4 + l + 1, :], values[:, j, :, l + 1])


@settings(max_examples=50, deadline=None)
@given(shape=st.tuples(*[st.integers(1, 8)] * 4), seed=st.integers(0, 2**31))
def test_roundtrip_property(shape, seed):
    r = np.random.default_rng(seed)
    values = r.random(shape)
    mask = (r.random(shape) > 0.5).astype(np.uint8)
    stack, back = rearrange_inverse(rearrange_forward(ImageStack(values, 1.0), mask))
    np.testing.assert_array_equal(stack.values, values)
    np.testing.assert_array_equal(back, mask)


def test_stack_validation():
    with pytest.raises(ValueError):
        ImageStack(-np.ones((1, 1, 1, 1)))
    with pytest.raises(ValueError):
        ImageStack(np.full((1, 1, 1, 1), 300.0), 255)
    with pytest.raises(ShapeError):
        ImageStack(np.zeros((2, 2, 2)))
