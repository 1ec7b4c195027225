"""Pure-numpy kernels; fallback when the compiled extension is unavailable.

Must stay call-compatible with ``_ckernels.pyx``.
"""

import numpy as np

from .loss import CE_EPS, ce, ce_grad, mse, mse_grad

MSE, CE = 0, 1
AMP_FLOOR = 1e-12


def recon_backprop(F, target, kind):
    """Loss of the energy-matched amplitude of ``F`` and its pull-back to ``F``.

    Returns ``(loss, recon, upstream, degenerate)`` where ``upstream`` is the
    complex field ``dL/dA * F/|F|`` (zero where ``|F| < AMP_FLOOR``).
    """
    A = np.abs(F)
    sa2 = np.sum(A * A)
    degenerate = not sa2 > 0.0
    c = 1.0 if degenerate else np.sqrt(np.sum(target * target) / sa2)
    R = c * A
    if kind == MSE:
        loss = mse(target, R)
        gR = mse_grad(target, R)
    else:
        loss = ce(target, R)
        gR = ce_grad(target, R)
        gR[R < CE_EPS] = 0.0
    if degenerate:
        gA = gR
    else:
        gA = c * gR - (c * np.sum(gR * A) / sa2) * A
    live = A >= AMP_FLOOR
    upstream = np.zeros_like(F)
    upstream[live] = gA[live] * F[live] / A[live]
    return loss, R, upstream, degenerate


def phase_project(h, b):
    """``Im(conj(h) * b)`` elementwise."""
    return h.real * b.imag - h.imag * b.real


def two_loop(s_buf, y_buf, rho, order, grad, gamma):
    """L-BFGS two-loop recursion; returns ``-H @ grad``.

    ``order`` lists the ring-buffer slots of stored pairs, oldest first.
    """
    q = grad.copy()
    alpha = np.empty(len(order))
    for k in range(len(order) - 1, -1, -1):
        i = order[k]
        alpha[k] = rho[i] * np.dot(s_buf[i], q)
        q -= alpha[k] * y_buf[i]
    r = gamma * q
    for k in range(len(order)):
        i = order[k]
        beta = rho[i] * np.dot(y_buf[i], r)
        r += (alpha[k] - beta) * s_buf[i]
    return -r
