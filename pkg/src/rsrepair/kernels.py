"""Backend selection for the hot kernels.

The compiled ``_kernels`` extension is used when it was built; otherwise the
numpy implementation in ``_kernels_py`` is used. Setting
``RSREPAIR_PURE_PYTHON=1`` forces the fallback.
"""

import os

from rsrepair import _kernels_py

if os.environ.get("RSREPAIR_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from rsrepair import _kernels as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

rref = _impl.rref
rref_many = _impl.rref_many
xor_rank = _impl.xor_rank
horner = _impl.horner
power_sums = _impl.power_sums

__all__ = ["BACKEND", "rref", "rref_many", "xor_rank", "horner", "power_sums"]
