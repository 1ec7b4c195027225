"""Phase-only computer-generated holograms for Fraunhofer diffraction.

Optimises a phase mask so that its far-field replay amplitude matches a
target image, using Adam or fixed-step L-BFGS with an MSE or cross-entropy
loss.
"""

from ._backend import BACKEND
from .autograd import LossAndGrad, loss_and_grad
from .errors import FormatError, HoloError, InvalidInputError, NumericalError, ShapeError
from .field import (
    amplitude,
    canonical_phase,
    fraunhofer_adjoint,
    fraunhofer_forward,
    phase_to_field,
    replay_amplitude,
    rotate_about_center,
)
from .loss import LossKind, ce, ce_grad, mse, mse_grad
from .optim import AdamState, LbfgsState, adam_step, lbfgs_direction, lbfgs_step
from .pipeline import (
    RunConfig,
    RunRecord,
    compare,
    initial_phase,
    normalize_recon,
    optimize,
    peak_mse,
    quantize_binary,
    symmetrize_target,
)

__version__ = "0.1.0"
