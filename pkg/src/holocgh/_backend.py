"""Kernel backend selection.

The compiled ``_ckernels`` extension is used when importable; otherwise the
numpy fallback. ``HOLOCGH_BACKEND=python`` forces the fallback.
"""

import os

from . import _pykernels

if os.environ.get("HOLOCGH_BACKEND", "").lower() == "python":
    kernels = _pykernels
    BACKEND = "python"
else:
    try:
        from . import _ckernels as kernels

        BACKEND = "cython"
    except ImportError:
        kernels = _pykernels
        BACKEND = "python"

