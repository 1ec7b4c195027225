"""Analytic gradient of the training loss with respect to the hologram phase.

Forward chain::

    phase -> h = exp(i*phase) -> F = forward(h) -> A = |F|
          -> R = c*A, c = sqrt(sum(T^2)/sum(A^2)) -> loss(T, R)

Backward: ``dL/dR`` from the loss, through the energy match to ``dL/dA``,
onto ``F`` along ``F/|F|``, back through the adjoint transform to ``b``, and
finally ``dL/dphase = Im(conj(h) * b)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._backend import kernels
from .errors import InvalidInputError, NumericalError, ShapeError
from .field import fraunhofer_adjoint, fraunhofer_forward
from .loss import LossKind

_KIND_CODE = {LossKind.MSE: 0, LossKind.CE: 1}


@dataclass
class LossAndGrad:
    loss: float
    grad: np.ndarray
    recon: np.ndarray
    degenerate_scale: bool = False


def loss_and_grad(phase, target, kind: LossKind | str) -> LossAndGrad:
    phase = np.asarray(phase, dtype=np.float64)
    target = np.ascontiguousarray(target, dtype=np.float64)
    if phase.shape != target.shape:
        raise ShapeError(f"phase shape {phase.shape} != target shape {target.shape}")
    if not np.all(np.isfinite(phase)):
        raise NumericalError("phase contains non-finite values")
    if phase.ndim != 2 or phase.size == 0:
        raise InvalidInputError(f"phase must be a non-empty 2-D array, got {phase.shape}")

    h = np.exp(1j * phase)
    F = fraunhofer_forward(h)
    loss, recon, upstream, degenerate = kernels.recon_backprop(
        F, target, _KIND_CODE[LossKind(kind)]
    )
    b = np.ascontiguousarray(fraunhofer_adjoint(upstream))
    grad = kernels.phase_project(h, b)
    if not (np.isfinite(loss) and np.all(np.isfinite(grad))):
        raise NumericalError("non-finite loss or gradient")
    return LossAndGrad(float(loss), grad, recon, bool(degenerate))

