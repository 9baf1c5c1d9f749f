"""Hot numeric kernels with two interchangeable backends.

The numba backend is the default when numba imports cleanly; set
``GLYPHFORGE_KERNELS=numpy`` to force the pure-numpy fallback (or
``numba`` to fail loudly if numba is missing).  ``benchmarks/bench_kernels.py``
compares the two.
"""

from __future__ import annotations

import os

from . import numpy_impl

_env = os.environ.get("GLYPHFORGE_KERNELS", "auto").lower()

if _env == "numpy":
    _active = numpy_impl
elif _env == "numba":
    from . import numba_impl as _active
else:
    if _env != "auto":
        raise ValueError(
            f"GLYPHFORGE_KERNELS must be 'auto', 'numba' or 'numpy', got {_env!r}"
        )
    try:
        from . import numba_impl as _active
    except ImportError:
        _active = numpy_impl


def backend_name() -> str:
    """Name of the active backend ('numba' or 'numpy')."""
    return "numba" if _active is not numpy_impl else "numpy"


def get_backend(name: str):
    """Fetch a backend module by name, independent of the active default."""
    if name == "numpy":
        return numpy_impl
    if name == "numba":
        from . import numba_impl

        return numba_impl
    raise ValueError(f"unknown kernel backend {name!r}")


label_image = _active.label_image
contour_histogram = _active.contour_histogram
assign_nearest = _active.assign_nearest
sum_by_label = _active.sum_by_label

__all__ = [
    "label_image",
    "contour_histogram",
    "assign_nearest",
    "sum_by_label",
    "backend_name",
    "get_backend",
]
