"""Backend selection for the detection kernels.

The compiled extension is used when it imports; otherwise the pure-Python
reference kernels are used. Setting ``ROBUSTECD_PURE_PYTHON=1`` forces the
fallback.
"""

import os

from . import _pykernels

if os.environ.get("ROBUSTECD_PURE_PYTHON") == "1":
    _impl = _pykernels
else:
    try:
        from . import _ckernels as _impl
    except ImportError:  # extension not built
        _impl = _pykernels

BACKEND = "cython" if _impl is not _pykernels else "python"

louvain = _impl.louvain
label_propagation = _impl.label_propagation
greedy_modularity = _impl.greedy_modularity
components = _impl.components


def get_backend(name):
    """Return the kernel module for ``"cython"`` or ``"python"``."""
    if name == "python":
        return _pykernels
    if name == "cython":
        from . import _ckernels

        return _ckernels
    raise ValueError(f"unknown backend {name!r}")
