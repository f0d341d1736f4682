"""Numeric backend selection.

The hot kernels exist twice: a compiled Cython extension (``_kernels``) and a
pure-NumPy fallback (``_kernels_py``).  By default the compiled module is
used when importable.  The environment variable ``QSWITCH_BACKEND`` forces a
choice: ``auto`` (default), ``compiled`` (ImportError when unavailable), or
``python``.
"""

import os

_CHOICES = ("auto", "compiled", "python")
_requested = os.environ.get("QSWITCH_BACKEND", "auto").strip().lower()
if _requested not in _CHOICES:
    raise ImportError(
        "QSWITCH_BACKEND must be one of %s, got %r" % (", ".join(_CHOICES), _requested)
    )

if _requested == "python":
    from . import _kernels_py as kernels

    _BACKEND = "python"
else:
    try:
        from . import _kernels as kernels  # type: ignore[no-redef]

        _BACKEND = "compiled"
    except ImportError:
        if _requested == "compiled":
            raise
        from . import _kernels_py as kernels  # type: ignore[no-redef]

        _BACKEND = "python"


def backend_name() -> str:
    """Name of the active numeric backend: 'compiled' or 'python'."""
    return _BACKEND
