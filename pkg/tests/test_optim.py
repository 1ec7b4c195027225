import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from holocgh.errors import NumericalError, ShapeError
from holocgh.optim import (
    CURVATURE_GUARD,
    AdamState,
    LbfgsState,
    adam_step,
    lbfgs_direction,
    lbfgs_step,
)


def dense_inverse_hessian(pairs, n):
    """Inverse-Hessian estimate from repeated dense BFGS updates, oldest pair first."""
    if not pairs:
        return np.eye(n)
    s, y = pairs[-1]
    H = (s @ y) / (y @ y) * np.eye(n)
    eye = np.eye(n)
    for s, y in pairs:
        rho = 1.0 / (y @ s)
        H = (eye - rho * np.outer(s, y)) @ H @ (eye - rho * np.outer(y, s)) + rho * np.outer(s, s)
    return H


def filled_state(rng, n, count, history=20):
    state = LbfgsState(history=history)
    A = rng.standard_normal((n, n))
    A = A @ A.T + n * np.eye(n)
    while len(state) < count:
        s = rng.standard_normal(n)
        state.push(s, A @ s)
    return state


# --- Adam -----------------------------------------------------------------

def test_adam_zero_gradient_keeps_params():
    state = AdamState(lr=0.1)
    p = np.array([1.0, -2.0, 3.0])
    assert np.array_equal(adam_step(state, p, np.zeros(3)), p)
    assert state.t == 1


def test_adam_hand_trace():
    state = AdamState(lr=0.1)
    out = adam_step(state, np.array([1.0]), np.array([0.5]))
    # m_hat = 0.5, v_hat = 0.25, step = 0.1 * 0.5 / (0.5 + 1e-8)
    assert out[0] == pytest.approx(1.0 - 0.1 * 0.5 / (0.5 + 1e-8), rel=1e-15)
    assert out[0] == pytest.approx(0.9, abs=1e-7)
    assert state.m[0] == pytest.approx(0.05) and state.v[0] == pytest.approx(0.00025)


@given(arrays(np.float64, 6, elements=st.floats(-1e3, 1e3)), st.floats(1e-3, 1e3))
def test_adam_first_step_bounded_and_scale_free(g, c):
    p = np.zeros(6)
    a = adam_step(AdamState(lr=0.1), p, g)
    b = adam_step(AdamState(lr=0.1), p, c * g)
    assert np.all(np.abs(a) <= 0.1 * (1 + 1e-12))
    big = np.abs(g) > 1e-3
    assert np.allclose(a[big], b[big], rtol=1e-4)
    assert np.allclose(a[big], -0.1 * np.sign(g[big]), rtol=1e-4)


def test_adam_errors():
    with pytest.raises(ShapeError):
        adam_step(AdamState(), np.zeros(3), np.zeros(4))
    with pytest.raises(NumericalError):
        adam_step(AdamState(), np.zeros(2), np.array([np.nan, 0.0]))


def test_adam_deterministic(rng):
    g = [rng.standard_normal(10) for _ in range(5)]
    runs = []
    for _ in range(2):
        state, p = AdamState(), np.zeros(10)
        for gi in g:
            p = adam_step(state, p, gi)
        runs.append(p)
    assert np.array_equal(*runs)


# --- L-BFGS direction ------------------------------------------------------

def test_direction_empty_history(rng):
    g = rng.standard_normal(5)
    assert np.array_equal(lbfgs_direction(LbfgsState(), g), -g)


def test_direction_hand_trace(kernels):
    state = LbfgsState()
    state.push(np.array([1.0]), np.array([1.0]))
    assert lbfgs_direction(state, np.array([2.0]))[0] == pytest.approx(-2.0, rel=1e-15)


def test_direction_zero_grad(kernels, rng):
    state = filled_state(rng, 6, 5)
    assert np.array_equal(lbfgs_direction(state, np.zeros(6)), np.zeros(6))


@pytest.mark.parametrize("count", [0, 1, 5, 20])
def test_direction_matches_dense_bfgs(kernels, rng, count):
    n = 8
    state = filled_state(rng, n, count)
    g = rng.standard_normal(n)
    H = dense_inverse_hessian(state.pairs(), n)
    expected = -H @ g
    d = lbfgs_direction(state, g)
    assert np.linalg.norm(d - expected) <= 1e-10 * np.linalg.norm(expected)


def test_direction_non_finite():
    with pytest.raises(NumericalError):
        lbfgs_direction(LbfgsState(), np.array([1.0, np.inf]))


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(0, 20))
def test_direction_is_descent(seed, count):
    rng = np.random.default_rng(seed)
    state = filled_state(rng, 7, count)
    g = rng.standard_normal(7)
    assert lbfgs_direction(state, g) @ g < 0


# --- L-BFGS step and history ------------------------------------------------

def test_first_step_is_steepest_descent(rng):
    p, g = rng.standard_normal(4), rng.standard_normal(4)
    assert np.array_equal(lbfgs_step(LbfgsState(lr=0.1), p, g), p - 0.1 * g)


def test_history_capacity(rng):
    A = np.diag(np.arange(1.0, 6.0))
    state = LbfgsState(lr=0.01)
    p = rng.standard_normal(5)
    for _ in range(22):  # 21 completed pairs
        p = lbfgs_step(state, p, A @ p)
    assert state.rejected == 0
    assert len(state) == 20


def test_curvature_guard_rejects():
    state = LbfgsState()
    assert not state.push(np.array([1.0, 0.0]), np.array([-1.0, 0.0]))
    assert not state.push(np.array([1e-6, 0.0]), np.array([1e-5, 0.0]))
    assert state.push(np.array([1e-3, 0.0]), np.array([1e-3, 0.0]))
    assert state.rejected == 2 and len(state) == 1
    for s, y in state.pairs():
        assert y @ s > CURVATURE_GUARD


def test_pairs_use_completed_gradients():
    state = LbfgsState(lr=0.5)
    p1 = lbfgs_step(state, np.array([1.0, 1.0]), np.array([1.0, 2.0]))
    assert len(state) == 0
    lbfgs_step(state, p1, np.array([0.5, 1.0]))
    (s, y), = state.pairs()
    assert np.array_equal(s, p1 - np.array([1.0, 1.0]))
    assert np.array_equal(y, np.array([-0.5, -1.0]))


def test_quadratic_beats_steepest_descent():
    A = np.diag([1.0, 10.0])
    lr = 1.0
    state, x = LbfgsState(lr=lr), np.array([1.0, 1.0])
    sd = x.copy()
    for _ in range(50):
        x = lbfgs_step(state, x, A @ x)
        sd = sd - lr * (A @ sd)
    assert np.linalg.norm(x) < 1e-3
    assert np.linalg.norm(x) < np.linalg.norm(sd)


def test_step_errors():
    with pytest.raises(ShapeError):
        lbfgs_step(LbfgsState(), np.zeros(3), np.zeros(2))
    with pytest.raises(NumericalError):
        lbfgs_step(LbfgsState(lr=1e308), np.array([0.0]), np.array([1e308]))


def test_line_search_hook():
    A = np.diag([1.0, 10.0])
    state = LbfgsState(lr=0.1)
    seen = []

    def search(params, d, g):
        seen.append(d @ g)
        return -(d @ g) / (d @ A @ d)  # exact minimiser along d

    x = np.array([1.0, 1.0])
    for _ in range(3):
        x = lbfgs_step(state, x, A @ x, line_search=search)
    assert np.linalg.norm(x) < 1e-10
    assert all(v < 0 for v in seen)
