"""Adam and limited-memory BFGS over flat float64 parameter vectors.

Both optimisers keep their state in a small dataclass that is mutated in
place by the step functions; the updated parameters are returned as a new
array.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from ._backend import kernels
from .errors import NumericalError, ShapeError

CURVATURE_GUARD = 1e-10


def _check(params: np.ndarray, grad: np.ndarray) -> None:
    if params.shape != grad.shape:
        raise ShapeError(f"params length {params.shape} != grad length {grad.shape}")
    if not np.all(np.isfinite(grad)):
        raise NumericalError("gradient contains non-finite values")


@dataclass
class AdamState:
    lr: float = 0.1
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    m: Optional[np.ndarray] = None
    v: Optional[np.ndarray] = None
    t: int = 0


def adam_step(state: AdamState, params, grad) -> np.ndarray:
    """One bias-corrected Adam update."""
    params = np.asarray(params, dtype=np.float64)
    grad = np.asarray(grad, dtype=np.float64)
    _check(params, grad)
    if state.m is None:
        state.m = np.zeros_like(params)
        state.v = np.zeros_like(params)
    elif state.m.shape != params.shape:
        raise ShapeError(f"state holds {state.m.shape} moments, got params {params.shape}")

    state.t += 1
    state.m *= state.beta1
    state.m += (1.0 - state.beta1) * grad
    state.v *= state.beta2
    state.v += (1.0 - state.beta2) * (grad * grad)
    m_hat = state.m / (1.0 - state.beta1**state.t)
    v_hat = state.v / (1.0 - state.beta2**state.t)
    return params - state.lr * m_hat / (np.sqrt(v_hat) + state.eps)


@dataclass
class LbfgsState:
    """Curvature-pair history for L-BFGS.

    Pairs live in preallocated ``(history, n)`` ring buffers; ``slots`` holds
    the occupied rows oldest first.
    """

    lr: float = 0.1
    history: int = 20
    s_buf: Optional[np.ndarray] = None
    y_buf: Optional[np.ndarray] = None
    rho: Optional[np.ndarray] = None
    slots: deque = field(default_factory=deque)
    prev_params: Optional[np.ndarray] = None
    prev_grad: Optional[np.ndarray] = None
    rejected: int = 0

    def __post_init__(self):
        if self.history < 1:
            raise ValueError("history must be >= 1")

    def __len__(self) -> int:
        return len(self.slots)

    def pairs(self):
        """Stored ``(s, y)`` pairs, oldest first."""
        return [(self.s_buf[i], self.y_buf[i]) for i in self.slots]

    def push(self, s: np.ndarray, y: np.ndarray) -> bool:
        """Store a pair unless it fails the curvature guard; evicts the oldest when full."""
        ys = float(np.dot(y, s))
        if not ys > CURVATURE_GUARD:
            self.rejected += 1
            return False
        if self.s_buf is None:
            n = s.shape[0]
            self.s_buf = np.zeros((self.history, n))
            self.y_buf = np.zeros((self.history, n))
            self.rho = np.zeros(self.history)
        slot = self.slots.popleft() if len(self.slots) == self.history else len(self.slots)
        self.s_buf[slot] = s
        self.y_buf[slot] = y
        self.rho[slot] = 1.0 / ys
        self.slots.append(slot)
        return True


def lbfgs_direction(state: LbfgsState, grad) -> np.ndarray:
    """Two-loop recursion: ``-H @ grad`` with ``H0 = gamma * I``."""
    grad = np.ascontiguousarray(grad, dtype=np.float64)
    if not np.all(np.isfinite(grad)):
        raise NumericalError("gradient contains non-finite values")
    if not state.slots:
        return -grad
    newest = state.slots[-1]
    y = state.y_buf[newest]
    gamma = 1.0 / (state.rho[newest] * float(np.dot(y, y)))
    return kernels.two_loop(
        state.s_buf, state.y_buf, state.rho, list(state.slots), grad, gamma
    )


LineSearch = Callable[[np.ndarray, np.ndarray, np.ndarray], Optional[float]]


def lbfgs_step(
    state: LbfgsState, params, grad, line_search: Optional[LineSearch] = None
) -> np.ndarray:
    """Admit the pair completed by ``grad``, then step along the two-loop direction.

    The step length is ``state.lr`` unless ``line_search(params, direction,
    grad)`` returns a length; ``None`` from it falls back to ``state.lr``.
    """
    params = np.asarray(params, dtype=np.float64)
    grad = np.asarray(grad, dtype=np.float64)
    _check(params, grad)
    if state.prev_params is not None:
        if state.prev_params.shape != params.shape:
            raise ShapeError("params length changed between calls")
        state.push(params - state.prev_params, grad - state.prev_grad)

    d = lbfgs_direction(state, grad)
    step = state.lr
    if line_search is not None:
        found = line_search(params, d, grad)
        if found is not None:
            step = found
    with np.errstate(over="ignore", invalid="ignore"):
        new = params + step * d
    if not np.all(np.isfinite(new)):
        raise NumericalError("L-BFGS update produced non-finite parameters")
    state.prev_params = params.copy()
    state.prev_grad = grad.copy()
    return new
