"""Kernel backend selection.

The hot inner loops (Jacobi rotations, range-coder symbol loop, Philox
block generation) exist twice: a compiled Cython extension and a NumPy
fallback with identical semantics.  The compiled one is preferred when
importable; set GMTC_BACKEND=python or GMTC_BACKEND=cython to force a
choice (forcing cython raises if the extension is missing).
"""

import os

from . import _pure

_choice = os.environ.get("GMTC_BACKEND", "auto").lower()

if _choice not in ("auto", "python", "cython"):
    raise ValueError(f"GMTC_BACKEND must be auto|python|cython, got {_choice!r}")

if _choice == "python":
    _impl = _pure
else:
    try:
        from . import _corekernels as _impl
    except ImportError:
        if _choice == "cython":
            raise
        _impl = _pure

BACKEND_NAME = _impl.BACKEND_NAME
philox_blocks = _impl.philox_blocks
jacobi_eig = _impl.jacobi_eig
rc_encode = _impl.rc_encode
rc_decode = _impl.rc_decode
fnv1a64 = _impl.fnv1a64


def use(name):
    """Rebind the module-level kernels to an explicit backend (for tests)."""
    global philox_blocks, jacobi_eig, rc_encode, rc_decode, fnv1a64, BACKEND_NAME
    mod = get_backend(name)
    BACKEND_NAME = mod.BACKEND_NAME
    philox_blocks = mod.philox_blocks
    jacobi_eig = mod.jacobi_eig
    rc_encode = mod.rc_encode
    rc_decode = mod.rc_decode
    fnv1a64 = mod.fnv1a64


def available_backends():
    names = ["python"]
    try:
        from . import _corekernels  # noqa: F401
        names.append("cython")
    except ImportError:
        pass
    return names


def get_backend(name):
    """Return the raw kernel module for an explicit backend name."""
    if name == "python":
        return _pure
    if name == "cython":
        from . import _corekernels
        return _corekernels
    raise ValueError(f"unknown backend {name!r}")
