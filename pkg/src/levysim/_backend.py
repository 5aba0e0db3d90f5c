"""Selects the compiled kernels when available, the pure-Python ones otherwise.

Set ``LEVYSIM_BACKEND=python`` to force the fallback.
"""

import os

from . import _pykernels

kernels = _pykernels
if os.environ.get("LEVYSIM_BACKEND", "").lower() != "python":
    try:
        from . import _ckernels as kernels  # noqa: F811
    except ImportError:  # extension not built
        kernels = _pykernels

BACKEND = kernels.BACKEND


def get_kernels(name=None):
    """Kernel module by name (``"cython"``/``"python"``); the active one if ``name`` is None."""
    if name is None:
        return kernels
    if name == "python":
        return _pykernels
    if name == "cython":
        from . import _ckernels

        return _ckernels
    raise ValueError(f"unknown backend {name!r}")


def compiled_available() -> bool:
    try:
        from . import _ckernels  # noqa: F401
    except ImportError:
        return False
    return True
