"""Distance kernels with a compiled fast path.

The Cython extension is optional: build failures downgrade the install to
the pure-numpy implementation with identical semantics. `BACKEND` reports
which one is live; `benchmarks/bench_kernels.py` compares the two.
"""

from __future__ import annotations

from . import _numpy_impl

try:
    from . import _distance as _impl

    BACKEND = "cython"
except ImportError:  # extension not built on this platform
    _impl = _numpy_impl
    BACKEND = "numpy"

min_image_distance_matrix = _impl.min_image_distance_matrix
min_image_distance_matrix_numpy = _numpy_impl.min_image_distance_matrix

__all__ = ["BACKEND", "min_image_distance_matrix", "min_image_distance_matrix_numpy"]
