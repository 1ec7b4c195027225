"""Phase masks, complex fields and centred unitary Fraunhofer propagation.

The far field of a unit-amplitude aperture is modelled by a 2D DFT scaled by
``1/sqrt(H*W)`` with the DC term swapped to pixel ``(H//2, W//2)``. The
adjoint undoes the swap and applies the inverse transform, so
``fraunhofer_adjoint(fraunhofer_forward(x)) == x`` up to rounding.
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidInputError

TWO_PI = 2.0 * np.pi


def _check_2d(a: np.ndarray, what: str) -> None:
    if a.ndim != 2:
        raise InvalidInputError(f"{what} must be 2-D, got shape {a.shape}")
    if a.shape[0] == 0 or a.shape[1] == 0:
        raise InvalidInputError(f"{what} has zero size: {a.shape}")


def canonical_phase(phase) -> np.ndarray:
    """Wrap phase values into ``[0, 2*pi)``."""
    phase = np.asarray(phase, dtype=np.float64)
    if not np.all(np.isfinite(phase)):
        raise InvalidInputError("phase contains non-finite values")
    out = np.mod(phase, TWO_PI)
    # np.mod can round tiny negatives up to exactly 2*pi
    out[out >= TWO_PI] = 0.0
    return out


def phase_to_field(phase) -> np.ndarray:
    """Unit-modulus field ``exp(1j * phase)``."""
    phase = np.asarray(phase, dtype=np.float64)
    if not np.all(np.isfinite(phase)):
        raise InvalidInputError("phase contains non-finite values")
    return np.exp(1j * phase)


def fraunhofer_forward(field) -> np.ndarray:
    field = np.asarray(field, dtype=np.complex128)
    _check_2d(field, "field")
    return np.fft.fftshift(np.fft.fft2(field, norm="ortho"))


def fraunhofer_adjoint(field) -> np.ndarray:
    """Exact adjoint (and inverse) of :func:`fraunhofer_forward`."""
    field = np.asarray(field, dtype=np.complex128)
    _check_2d(field, "field")
    return np.fft.ifft2(np.fft.ifftshift(field), norm="ortho")


def amplitude(field) -> np.ndarray:
    return np.abs(np.asarray(field, dtype=np.complex128))


def replay_amplitude(phase) -> np.ndarray:
    """Simulated far-field amplitude of a phase-only hologram."""
    return amplitude(fraunhofer_forward(phase_to_field(phase)))


def center_pixel(shape) -> tuple[int, int]:
    return shape[0] // 2, shape[1] // 2


def rotate_about_center(image) -> np.ndarray:
    """180 degree rotation about the DC pixel, ``A[(2c - u) mod H, (2c - v) mod W]``.

    For even sizes this differs from ``image[::-1, ::-1]`` by a one-pixel
    roll, because the DC pixel is not at the geometric centre.
    """
    image = np.asarray(image)
    h, w = image.shape
    ch, cw = center_pixel(image.shape)
    rows = (2 * ch - np.arange(h)) % h
    cols = (2 * cw - np.arange(w)) % w
    return image[np.ix_(rows, cols)]
