"""Kernel backend selection.

The compiled extension is used when it imports; otherwise, or when
``DISKWALK_PURE_PYTHON=1`` is set, the numpy implementation is used.
``BACKEND`` names the active one.
"""

import os
from types import SimpleNamespace

from . import _kernels_py

_NAMES = ("partial_sums", "z_walk_path", "record_fields", "lil_scan")


def _load_compiled():
    try:
        from . import _kernels
    except ImportError:
        return None
    return _kernels


_compiled = None if os.environ.get("DISKWALK_PURE_PYTHON") == "1" else _load_compiled()


def get_backend(name=None):
    """Namespace of kernel functions for ``"cython"``, ``"python"`` or the active backend."""
    if name is None:
        name = BACKEND
    if name == "cython":
        mod = _compiled or _load_compiled()
        if mod is None:
            raise ImportError("compiled kernels are not built; run `pip install -e .`")
    elif name == "python":
        mod = _kernels_py
    else:
        raise ValueError(f"unknown backend {name!r}")
    return SimpleNamespace(name=name, **{k: getattr(mod, k) for k in _NAMES})


BACKEND = "cython" if _compiled is not None else "python"
_active = get_backend(BACKEND)
partial_sums = _active.partial_sums
z_walk_path = _active.z_walk_path
record_fields = _active.record_fields
lil_scan = _active.lil_scan
