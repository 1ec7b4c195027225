"""The optimisation loop for phase-only Fraunhofer holograms.

:func:`optimize` starts from a seeded random phase, and on every iteration
evaluates the loss and its phase gradient, records the training loss and
the peak-normalised MSE of the reconstruction, then takes one optimiser
step. Non-finite values end the run early and mark it diverged instead of
raising, so comparisons always complete.
"""

from __future__ import annotations

import logging
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import line_search as _scipy_line_search

from .autograd import loss_and_grad
from .errors import InvalidInputError, NumericalError, ShapeError
from .field import TWO_PI, canonical_phase, replay_amplitude, rotate_about_center
from .loss import LossKind, loss_value, mse
from .optim import AdamState, LbfgsState, adam_step, lbfgs_step

log = logging.getLogger(__name__)

OPTIMIZERS = ("adam", "lbfgs")
LINE_SEARCHES = ("fixed", "strong-wolfe")
# a run "converges" when its final MSE is at least 10% below its initial MSE
CONVERGENCE_GAIN = 0.9

COMPARE_RUNS = (
    ("lbfgs_ce", "lbfgs", LossKind.CE),
    ("lbfgs_mse", "lbfgs", LossKind.MSE),
    ("adam_mse", "adam", LossKind.MSE),
    ("adam_ce", "adam", LossKind.CE),
)


class DegenerateScaleWarning(RuntimeWarning):
    pass


@dataclass
class RunConfig:
    optimizer: str = "lbfgs"
    loss: LossKind = LossKind.CE
    lr: float = 0.1
    iterations: int = 100
    seed: int = 0
    height: int = 128
    width: int = 128
    lbfgs_history: int = 20
    save_every: int = 1
    line_search: str = "fixed"

    def __post_init__(self):
        self.optimizer = self.optimizer.lower()
        self.loss = LossKind(self.loss)
        if self.optimizer not in OPTIMIZERS:
            raise InvalidInputError(f"unknown optimizer {self.optimizer!r}")
        if self.line_search not in LINE_SEARCHES:
            raise InvalidInputError(f"unknown line search {self.line_search!r}")
        if not self.lr > 0:
            raise InvalidInputError("lr must be > 0")
        if self.iterations < 1:
            raise InvalidInputError("iterations must be >= 1")
        if self.lbfgs_history < 1:
            raise InvalidInputError("lbfgs_history must be >= 1")
        if self.save_every < 0:
            raise InvalidInputError("save_every must be >= 0")
        if not 0 <= self.seed < 2**64:
            raise InvalidInputError("seed must be an unsigned 64-bit integer")

    @property
    def dims(self) -> tuple[int, int]:
        return self.height, self.width


@dataclass
class RunRecord:
    config: RunConfig
    loss_history: np.ndarray
    mse_history: np.ndarray
    final_phase: np.ndarray
    rejected_pairs: int = 0
    diverged_at: Optional[int] = None
    snapshots: dict = field(default_factory=dict)

    @property
    def diverged(self) -> bool:
        return self.diverged_at is not None

    @property
    def initial_mse(self) -> float:
        return float(self.mse_history[0])

    @property
    def final_mse(self) -> float:
        """Last finite recorded MSE."""
        finite = self.mse_history[np.isfinite(self.mse_history)]
        return float(finite[-1]) if finite.size else float("nan")

    @property
    def converged(self) -> bool:
        return not self.diverged and self.final_mse < CONVERGENCE_GAIN * self.initial_mse


def initial_phase(dims, seed: int) -> np.ndarray:
    """I.i.d. uniform phase on ``[0, 2*pi)`` from a PCG64 stream seeded with ``seed``."""
    h, w = dims
    if h < 2 or w < 2:
        raise InvalidInputError(f"dims must be at least 2x2, got {dims}")
    rng = np.random.Generator(np.random.PCG64(seed))
    return canonical_phase(rng.random((h, w)) * TWO_PI)


def normalize_recon(raw, target) -> np.ndarray:
    """Scale ``raw`` so that its energy equals the target's.

    An all-zero ``raw`` is returned unchanged with a
    :class:`DegenerateScaleWarning`.
    """
    raw = np.asarray(raw, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if raw.shape != target.shape:
        raise ShapeError(f"raw shape {raw.shape} != target shape {target.shape}")
    et = np.sum(target * target)
    if not et > 0:
        raise InvalidInputError("target is all zero")
    er = np.sum(raw * raw)
    if not er > 0:
        warnings.warn("reconstruction has zero energy", DegenerateScaleWarning, stacklevel=2)
        return raw.copy()
    return raw * np.sqrt(et / er)


def reconstruct(phase, target) -> np.ndarray:
    """Energy-matched replay amplitude of ``phase``."""
    return normalize_recon(replay_amplitude(phase), target)


def forward_loss(phase, target, kind: LossKind | str) -> float:
    """Training loss by the plain forward route (no kernels, no backward pass)."""
    return loss_value(kind, target, reconstruct(phase, target))


def peak_normalize(image) -> np.ndarray:
    image = np.asarray(image, dtype=np.float64)
    peak = image.max()
    return image / peak if peak > 0 else image.copy()


def peak_mse(recon, target) -> float:
    """MSE after scaling each image to peak 1; the figure reported per iteration."""
    return mse(peak_normalize(target), peak_normalize(recon))


def quantize_binary(phase) -> np.ndarray:
    """Snap each pixel to the circularly nearer of ``{0, pi}``.

    ``[pi/2, 3pi/2)`` maps to ``pi``, the rest to ``0``.
    """
    p = canonical_phase(phase)
    return np.where((p >= np.pi / 2) & (p < 1.5 * np.pi), np.pi, 0.0)


def symmetrize_target(image) -> np.ndarray:
    """Average with the 180 degree rotation about the DC pixel.

    A binary-phase hologram can only produce replay fields with this
    symmetry, so targets for it are prepared this way.
    """
    image = np.asarray(image, dtype=np.float64)
    return 0.5 * (image + rotate_about_center(image))


def _wolfe_search(target, kind):
    shape = target.shape
    cache = {}

    def evaluate(x):
        key = x.tobytes()
        if key not in cache:
            cache.clear()
            cache[key] = loss_and_grad(x.reshape(shape), target, kind)
        return cache[key]

    def search(params, direction, grad):
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                alpha = _scipy_line_search(
                    lambda x: evaluate(x).loss,
                    lambda x: evaluate(x).grad.ravel(),
                    params,
                    direction,
                    gfk=grad,
                )[0]
        except NumericalError:
            return None
        return alpha

    return search


def optimize(target, config: RunConfig, phase0=None) -> RunRecord:
    """Run ``config.iterations`` optimisation steps against ``target``.

    ``phase0`` overrides the seeded initial phase.
    """
    target = np.ascontiguousarray(target, dtype=np.float64)
    if target.shape != config.dims:
        raise ShapeError(f"target shape {target.shape} != configured dims {config.dims}")
    if np.any(target < 0) or not np.all(np.isfinite(target)):
        raise InvalidInputError("target must be finite and non-negative")
    phase = initial_phase(config.dims, config.seed) if phase0 is None else np.array(phase0, dtype=np.float64)
    if phase.shape != config.dims:
        raise ShapeError(f"initial phase shape {phase.shape} != {config.dims}")

    n_iter = config.iterations
    loss_hist = np.full(n_iter, np.nan)
    mse_hist = np.full(n_iter, np.nan)
    snapshots = {}
    diverged_at = None

    if config.optimizer == "adam":
        state = AdamState(lr=config.lr)
    else:
        state = LbfgsState(lr=config.lr, history=config.lbfgs_history)
    search = _wolfe_search(target, config.loss) if config.line_search == "strong-wolfe" else None

    params = phase.ravel().copy()
    for k in range(n_iter):
        try:
            lg = loss_and_grad(params.reshape(config.dims), target, config.loss)
        except NumericalError as exc:
            log.warning("run diverged at iteration %d: %s", k, exc)
            diverged_at = k
            break
        loss_hist[k] = lg.loss
        mse_hist[k] = peak_mse(lg.recon, target)
        if config.save_every and k % config.save_every == 0:
            snapshots[k] = lg.recon
        try:
            if config.optimizer == "adam":
                new = adam_step(state, params, lg.grad.ravel())
            else:
                new = lbfgs_step(state, params, lg.grad.ravel(), line_search=search)
        except NumericalError as exc:
            log.warning("run diverged at iteration %d: %s", k, exc)
            diverged_at = k
            break
        if not np.all(np.isfinite(new)):
            diverged_at = k
            break
        params = new

    return RunRecord(
        config=config,
        loss_history=loss_hist,
        mse_history=mse_hist,
        final_phase=canonical_phase(params.reshape(config.dims)),
        rejected_pairs=getattr(state, "rejected", 0),
        diverged_at=diverged_at,
        snapshots=snapshots,
    )


def compare(target, config: RunConfig, parallel: bool = False) -> dict[str, RunRecord]:
    """Run all four optimiser/loss combinations from the same initial phase.

    Optimizer and loss in ``config`` are ignored; everything else is shared.
    """
    phase0 = initial_phase(config.dims, config.seed)
    configs = {
        label: RunConfig(**{**config.__dict__, "optimizer": opt, "loss": kind})
        for label, opt, kind in COMPARE_RUNS
    }
    if parallel:
        with ThreadPoolExecutor(max_workers=len(configs)) as pool:
            futures = {label: pool.submit(optimize, target, cfg, phase0) for label, cfg in configs.items()}
            return {label: fut.result() for label, fut in futures.items()}
    return {label: optimize(target, cfg, phase0) for label, cfg in configs.items()}
