"""Backend selection for the hot numerical kernels.

Two interchangeable implementations exist:

* ``_core`` -- Cython extension, compiled at install time;
* ``_numpy`` -- pure-numpy fallback, always available.

The default is the compiled core when importable.  Set
``RICCI_LAB_BACKEND=numpy`` (or ``cython``) to force a choice;
forcing ``cython`` raises if the extension is missing.
"""

import os

from . import _numpy

_requested = os.environ.get("RICCI_LAB_BACKEND", "auto").lower()

if _requested not in ("auto", "cython", "numpy"):
    raise ImportError(f"RICCI_LAB_BACKEND must be auto|cython|numpy, got {_requested!r}")

_impl = None
if _requested in ("auto", "cython"):
    try:
        from . import _core as _impl
    except ImportError:
        if _requested == "cython":
            raise ImportError("RICCI_LAB_BACKEND=cython but the compiled "
                              "extension ricci_lab._kernels._core is not available")
        _impl = None
if _impl is None:
    _impl = _numpy

OMEGA = _numpy.OMEGA

_NAMES = ("rm_to_op", "op_to_rm", "wee", "frame_transform", "riemann_from_derivs")


def use_backend(name):
    """Rebind the kernel functions to a backend at runtime (benchmark and
    test hook; both backends agree to rounding)."""
    global BACKEND
    if name == "numpy":
        impl = _numpy
    elif name == "cython":
        from . import _core as impl
    else:
        raise ValueError(f"unknown backend {name!r}")
    for fn_name in _NAMES:
        globals()[fn_name] = getattr(impl, fn_name)
    BACKEND = impl.BACKEND_NAME
    return BACKEND


use_backend(_impl.BACKEND_NAME)

__all__ = ["BACKEND", "OMEGA", "use_backend", "rm_to_op", "op_to_rm", "wee",
           "frame_transform", "riemann_from_derivs"]
