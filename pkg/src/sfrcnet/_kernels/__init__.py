"""Hot-kernel backend selection.

The compiled Cython extension is preferred when it imports; otherwise the
numpy implementation in :mod:`.pure` is used.  Set ``SFRCNET_PURE_PYTHON=1``
to force the fallback (useful for benchmarking and debugging).  Both
backends expose the same functions and are cross-checked in the test suite.
"""
import importlib
import os

from . import pure
from .pure import KernelError  # noqa: F401  (shared error type)

_fast = None
if os.environ.get("SFRCNET_PURE_PYTHON", "0") != "1":
    try:
        _fast = importlib.import_module("._fast", __name__)
    except ImportError:
        _fast = None

if _fast is not None:
    BACKEND = "compiled"
    matrix_update = _fast.matrix_update
    matrix_path = _fast.matrix_path
    composite_step = _fast.composite_step
    composite_path = _fast.composite_path
    eshelby_ud = _fast.eshelby_ud
else:
    BACKEND = "pure"
    matrix_update = pure.matrix_update
    matrix_path = pure.matrix_path
    composite_step = pure.composite_step
    composite_path = pure.composite_path
    eshelby_ud = pure.eshelby_ud


def get_backend(name="auto"):
    """Return the kernel namespace for ``name`` ("auto", "pure", "compiled")."""
    if name in ("auto", BACKEND):
        import sys
        return sys.modules[__name__]
    if name == "pure":
        return pure
    if name == "compiled":
        if _fast is None:
            raise KernelError("compiled kernel backend is not available")
        return _fast
    raise ValueError(f"unknown kernel backend {name!r}")
