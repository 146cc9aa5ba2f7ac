"""Kernel backend selection.

Two interchangeable kernel lanes exist: numba-compiled loops (default when
numba imports cleanly) and pure numpy. The environment variable
``TOPODENOISE_BACKEND`` picks the lane at import time:

    TOPODENOISE_BACKEND=numba   force the compiled lane (error if unavailable)
    TOPODENOISE_BACKEND=numpy   force the pure-numpy fallback
    TOPODENOISE_BACKEND=auto    numba if available, else numpy (default)

``set_backend``/``get_backend`` switch lanes programmatically (tests and the
backend benchmark use this). The two lanes agree to ~1e-12 relative; each is
deterministic on its own, so reproducibility claims hold per backend.
"""

import os

from . import _kernels_numpy
from .errors import ValidationError

_BACKENDS = {"numpy": _kernels_numpy}
_active = None


def _load_numba_lane():
    if "numba" not in _BACKENDS:
        from . import _kernels_numba
        _BACKENDS["numba"] = _kernels_numba
    return _BACKENDS["numba"]


def available_backends():
    names = ["numpy"]
    try:
        _load_numba_lane()
        names.insert(0, "numba")
    except ImportError:
        pass
    return names


def set_backend(name):
    """Select the kernel lane by name ('numba' or 'numpy')."""
    global _active
    if name == "numpy":
        _active = "numpy"
    elif name == "numba":
        _load_numba_lane()
        _active = "numba"
    else:
        raise ValidationError(f"unknown backend {name!r}; expected 'numba' or 'numpy'")
    return _active


def _init_from_env():
    global _active
    choice = os.environ.get("TOPODENOISE_BACKEND", "auto").strip().lower()
    if choice in ("numba", "numpy"):
        set_backend(choice)
    elif choice in ("auto", ""):
        try:
            set_backend("numba")
        except ImportError:
            set_backend("numpy")
    else:
        raise ValidationError(
            f"TOPODENOISE_BACKEND={choice!r} not understood (use numba, numpy or auto)")


def get_backend():
    """Name of the active kernel lane."""
    if _active is None:
        _init_from_env()
    return _active


def kernels():
    """The active kernel module."""
    return _BACKENDS[get_backend()]
