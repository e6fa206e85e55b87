"""Selects the integration kernel at import time.

The compiled extension is used when it was built; setting the environment
variable ``MAGFLOW_PURE_PYTHON=1`` forces the numpy fallback.
"""

import os

from . import _dopri_py

try:
    from . import _dopri_ext
except ImportError:  # extension not built
    _dopri_ext = None

KERNELS = {"python": _dopri_py.dopri5}
if _dopri_ext is not None:
    KERNELS["cython"] = _dopri_ext.dopri5

if os.environ.get("MAGFLOW_PURE_PYTHON") or _dopri_ext is None:
    BACKEND = "python"
else:
    BACKEND = "cython"

dopri5 = KERNELS[BACKEND]


def get_kernel(name: str | None = None):
    """Kernel by name (``"cython"`` or ``"python"``); default is the active one."""
    if name is None:
        return dopri5
    try:
        return KERNELS[name]
    except KeyError:
        raise ValueError(f"kernel {name!r} is not available; have {sorted(KERNELS)}") from None
