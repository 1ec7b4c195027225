"""Target images, phase maps and metric tables on disk.

Phase maps are stored in the ``HOLOPHS1`` format: the 8-byte magic
``b"HOLOPHS1"``, height and width as little-endian uint32, then ``H*W``
little-endian float64 values in row-major order. PNGs are 8-bit grayscale
and only ever previews.
"""

from __future__ import annotations

import csv
import os
import struct

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import FormatError, InvalidInputError, ShapeError
from .field import TWO_PI

PHASE_MAGIC = b"HOLOPHS1"
_HEADER = struct.Struct("<8sII")


def _area_weights(n_in: int, n_out: int) -> np.ndarray:
    """(n_out, n_in) matrix averaging input cells over each output cell."""
    edges_in = np.arange(n_in + 1) / n_in
    edges_out = np.arange(n_out + 1) / n_out
    lo = np.maximum(edges_out[:-1, None], edges_in[None, :-1])
    hi = np.minimum(edges_out[1:, None], edges_in[None, 1:])
    return np.clip(hi - lo, 0.0, None) * n_out


def resize_area(image, out_dims) -> np.ndarray:
    """Resample by area averaging (exact box-filter overlap weights)."""
    image = np.asarray(image, dtype=np.float64)
    h, w = out_dims
    if h < 1 or w < 1:
        raise InvalidInputError(f"output dims must be positive, got {out_dims}")
    if image.shape == (h, w):
        return image.copy()
    return _area_weights(image.shape[0], h) @ image @ _area_weights(image.shape[1], w).T


def to_luma(pixels: np.ndarray) -> np.ndarray:
    pixels = np.asarray(pixels, dtype=np.float64)
    if pixels.ndim == 2:
        return pixels
    if pixels.ndim == 3 and pixels.shape[2] in (3, 4):
        return 0.299 * pixels[..., 0] + 0.587 * pixels[..., 1] + 0.114 * pixels[..., 2]
    raise FormatError(f"unsupported pixel layout {pixels.shape}")


def load_target(path, out_dims=None) -> np.ndarray:
    """Read an 8-bit gray or RGB PNG/PGM as amplitudes in ``[0, 1]``."""
    try:
        with Image.open(path) as im:
            if im.mode not in ("L", "RGB", "RGBA", "P"):
                raise OSError(f"{path}: unsupported image mode {im.mode!r}")
            if im.mode == "P":
                im = im.convert("RGB")
            pixels = np.asarray(im)
    except (UnidentifiedImageError, SyntaxError) as exc:
        raise OSError(f"{path}: not a readable PNG/PGM image ({exc})") from exc
    if pixels.size == 0:
        raise InvalidInputError(f"{path}: image has zero size")
    luma = to_luma(pixels)
    if out_dims is not None:
        luma = resize_area(luma, out_dims)
    return luma / 255.0


def save_phase(phase, path) -> None:
    phase = np.asarray(phase, dtype=np.float64)
    if phase.ndim != 2:
        raise InvalidInputError(f"phase must be 2-D, got {phase.shape}")
    if not np.all(np.isfinite(phase)):
        raise InvalidInputError("phase contains non-finite values")
    h, w = phase.shape
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(PHASE_MAGIC, h, w))
        fh.write(np.ascontiguousarray(phase, dtype="<f8").tobytes())


def load_phase(path) -> np.ndarray:
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < _HEADER.size:
        raise FormatError(f"{path}: truncated header at offset {len(data)}, need {_HEADER.size} bytes")
    magic, h, w = _HEADER.unpack_from(data)
    if magic != PHASE_MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r} at offset 0")
    expected = _HEADER.size + 8 * h * w
    if len(data) != expected:
        raise FormatError(
            f"{path}: payload ends at offset {len(data)}, expected {expected} for {h}x{w}"
        )
    phase = np.frombuffer(data, dtype="<f8", offset=_HEADER.size).reshape(h, w).astype(np.float64)
    if not np.all(np.isfinite(phase)):
        bad = int(np.flatnonzero(~np.isfinite(phase.ravel()))[0])
        raise FormatError(f"{path}: non-finite value at offset {_HEADER.size + 8 * bad}")
    return phase


def phase_preview(phase) -> np.ndarray:
    """8-bit gray levels ``floor(phase / 2pi * 256)`` clamped to ``[0, 255]``."""
    levels = np.floor(np.asarray(phase, dtype=np.float64) / TWO_PI * 256.0)
    return np.clip(levels, 0, 255).astype(np.uint8)


def _write_png(pixels: np.ndarray, path) -> None:
    Image.fromarray(pixels).save(path, format="PNG")


def save_phase_preview(phase, path) -> None:
    _write_png(phase_preview(phase), path)


def image_to_gray(image) -> np.ndarray:
    """Rescale to peak 1 and round to 8 bits; all-zero stays black."""
    image = np.asarray(image, dtype=np.float64)
    peak = image.max() if image.size else 0.0
    scaled = image / peak if peak > 0 else np.zeros_like(image)
    return np.clip(np.rint(scaled * 255.0), 0, 255).astype(np.uint8)


def save_image(image, path) -> None:
    _write_png(image_to_gray(image), path)


def _check_label(label: str) -> str:
    if any(ch in label for ch in ',"\r\n'):
        raise ValueError(f"CSV label may not contain commas, quotes or newlines: {label!r}")
    return label


def write_columns_csv(columns: dict, path) -> None:
    """Write ``iteration,<label>...`` with one row per index, 9 significant digits."""
    labels = [_check_label(str(k)) for k in columns]
    series = [np.asarray(v, dtype=np.float64).ravel() for v in columns.values()]
    lengths = {len(s) for s in series}
    if len(lengths) > 1:
        raise ShapeError(f"column lengths differ: {sorted(lengths)}")
    n = lengths.pop() if lengths else 0
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["iteration", *labels])
        for i in range(n):
            writer.writerow([i, *(f"{s[i]:.9g}" for s in series)])


def write_loss_csv(records, labels, path, field: str = "mse_history") -> None:
    """One column per run record, taken from ``field`` (MSE by default)."""
    if len(records) != len(labels):
        raise ShapeError("need exactly one label per record")
    write_columns_csv({lab: getattr(rec, field) for lab, rec in zip(labels, records)}, path)


def ensure_dir(path) -> None:
    os.makedirs(path, exist_ok=True)
