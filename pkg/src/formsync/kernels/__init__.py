"""Closed-loop integration kernels.

The compiled module is used when it was built; otherwise (or when
``FORMSYNC_PURE_PYTHON`` is set to a non-empty value other than ``0``) the
pure-Python fallback with identical signatures is used.
"""
import os

from . import _pykernels

MODE_SYNC = _pykernels.MODE_SYNC
MODE_PD = _pykernels.MODE_PD
REF_SINE = _pykernels.REF_SINE
REF_ROTATION = _pykernels.REF_ROTATION
STATUS_OK = _pykernels.STATUS_OK
STATUS_GUARD = _pykernels.STATUS_GUARD
STATUS_NONFINITE = _pykernels.STATUS_NONFINITE


def _want_pure() -> bool:
    v = os.environ.get("FORMSYNC_PURE_PYTHON", "")
    return v not in ("", "0")


def load_backend(name: str | None = None):
    """Return ``(module, name)`` for ``"compiled"``, ``"python"`` or auto."""
    if name == "python" or (name is None and _want_pure()):
        return _pykernels, "python"
    try:
        from . import _ckernels
    except ImportError:
        if name == "compiled":
            raise
        return _pykernels, "python"
    return _ckernels, "compiled"


_impl, BACKEND = load_backend()
attitude_advance = _impl.attitude_advance
translation_advance = _impl.translation_advance

__all__ = ["BACKEND", "load_backend", "attitude_advance", "translation_advance"]
