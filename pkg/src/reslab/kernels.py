"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the NumPy versions.
Set ``RESLAB_BACKEND=numpy`` to force the fallback.
"""

import os

from reslab import _pykernels

BACKEND = "numpy"
_impl = _pykernels

if os.environ.get("RESLAB_BACKEND", "").lower() != "numpy":
    try:
        from reslab import _ckernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels

airy_scaled = _impl.airy_scaled
aberth_corrections = _impl.aberth_corrections
horner_ratio = _impl.horner_ratio
zeta = _pykernels.zeta

__all__ = ["BACKEND", "airy_scaled", "aberth_corrections", "horner_ratio", "zeta"]
