import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from holocgh.errors import ShapeError
from holocgh.loss import CE_EPS, ce, ce_grad, mse, mse_grad

images = arrays(np.float64, (3, 4), elements=st.floats(0, 10))


def central_diff(f, x, h=1e-6):
    g = np.zeros_like(x)
    for i in np.ndindex(x.shape):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (f(x + e) - f(x - e)) / (2 * h)
    return g


def test_mse_examples():
    assert mse(np.ones((2, 3)), np.ones((2, 3))) == 0.0
    assert mse(np.array([1.0, 0.0]), np.array([0.0, 1.0])) == 1.0
    assert mse(np.array([1.0, 0.0]), np.array([0.0, 0.0])) == 0.5


def test_ce_examples():
    assert ce(np.array([1.0]), np.array([1.0])) == 0.0
    assert ce(np.array([0.5, 0.5]), np.array([0.5, 0.5])) == pytest.approx(0.5 * math.log(2), rel=1e-15)
    assert ce(np.array([0.5, 0.5]), np.array([0.5, 0.5])) == pytest.approx(0.34657, abs=1e-5)
    e1 = math.exp(-1)
    assert ce(np.array([1.0, 1.0]), np.array([e1, e1])) == pytest.approx(1.0, rel=1e-15)


def test_ce_finite_with_zero_recon():
    val = ce(np.array([1.0, 0.5]), np.array([0.0, 0.0]))
    assert math.isfinite(val)
    assert val == pytest.approx(-0.75 * math.log(CE_EPS))


def test_shape_mismatch():
    for fn in (mse, ce, mse_grad, ce_grad):
        with pytest.raises(ShapeError):
            fn(np.zeros((2, 2)), np.zeros((4,)))


def test_mse_grad_examples():
    assert np.array_equal(mse_grad(np.ones((2, 2)), np.ones((2, 2))), np.zeros((2, 2)))
    assert np.array_equal(mse_grad(np.array([1.0, 0.0]), np.array([0.0, 0.0])), [-1.0, 0.0])


def test_ce_grad_examples():
    assert np.array_equal(ce_grad(np.array([0.0]), np.array([0.3])), [0.0])
    assert np.array_equal(ce_grad(np.array([1.0]), np.array([1.0])), [-1.0])
    assert np.all(ce_grad(np.array([0.0, 0.0]), np.array([0.0, 5.0])) == 0.0)


def test_mse_grad_finite_difference(rng):
    x, y = rng.random((4, 4)), rng.random((4, 4))
    fd = central_diff(lambda r: mse(x, r), y)
    an = mse_grad(x, y)
    assert np.max(np.abs(an - fd) / np.abs(an)) < 1e-6


def test_ce_grad_finite_difference(rng):
    x, y = rng.random((4, 4)) + 0.1, rng.random((4, 4)) + 0.1
    fd = central_diff(lambda r: ce(x, r), y)
    an = ce_grad(x, y)
    assert np.max(np.abs(an - fd) / np.abs(an)) < 1e-6


@given(images, images)
def test_mse_symmetric_nonnegative(x, y):
    assert mse(x, y) == mse(y, x)
    assert mse(x, y) >= 0


@given(images)
def test_mse_zero_iff_equal(x):
    assert mse(x, x) == 0.0
    y = x.copy()
    y[0, 0] += 1.0
    assert mse(x, y) > 0


@given(images, images, st.floats(0.01, 100))
def test_mse_scaling(x, y, c):
    base = mse(x, y)
    assert mse(c * x, c * y) == pytest.approx(c * c * base, rel=1e-12, abs=1e-300)


@given(images, arrays(np.float64, (3, 4), elements=st.floats(0, 10)))
def test_ce_always_finite(x, y):
    assert math.isfinite(ce(x, y))
