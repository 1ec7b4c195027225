"""MSE and cross-entropy over flattened images, with per-pixel gradients.

Both losses compare a target ``X`` with a reconstruction ``Y`` pixel by
pixel and average over ``n = X.size``. Cross entropy uses the natural log and
clamps ``Y`` at :data:`CE_EPS` so dark pixels stay finite. Reductions go
through ``np.sum`` (fixed pairwise order) so repeated calls are bit-identical.
"""

from __future__ import annotations

import enum

import numpy as np

from .errors import ShapeError

CE_EPS = 1e-10


class LossKind(str, enum.Enum):
    MSE = "mse"
    CE = "ce"


def _pair(target, recon) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(target, dtype=np.float64).ravel()
    y = np.asarray(recon, dtype=np.float64).ravel()
    if np.shape(target) != np.shape(recon):
        raise ShapeError(
            f"target shape {np.shape(target)} != recon shape {np.shape(recon)}"
        )
    return x, y


def mse(target, recon) -> float:
    x, y = _pair(target, recon)
    d = x - y
    return float(np.sum(d * d) / x.size)


def ce(target, recon) -> float:
    x, y = _pair(target, recon)
    return float(-np.sum(x * np.log(np.maximum(y, CE_EPS))) / x.size)


def mse_grad(target, recon) -> np.ndarray:
    """d mse / d recon, shaped like ``recon``."""
    x, y = _pair(target, recon)
    return ((2.0 / x.size) * (y - x)).reshape(np.shape(recon))


def ce_grad(target, recon) -> np.ndarray:
    """d ce / d recon, shaped like ``recon``.

    Uses the clamped denominator everywhere; callers that treat the clamp as
    locally constant mask the ``recon < CE_EPS`` pixels themselves.
    """
    x, y = _pair(target, recon)
    return (-x / (x.size * np.maximum(y, CE_EPS))).reshape(np.shape(recon))


def loss_value(kind: LossKind | str, target, recon) -> float:
    kind = LossKind(kind)
    return mse(target, recon) if kind is LossKind.MSE else ce(target, recon)


def loss_grad(kind: LossKind | str, target, recon) -> np.ndarray:
    kind = LossKind(kind)
    return mse_grad(target, recon) if kind is LossKind.MSE else ce_grad(target, recon)
