"""Pure-numpy reference implementation of the distance kernels.

Semantics must stay bit-compatible with the compiled extension: both are
exercised against each other in the benchmark and the kernel tests.
"""

from __future__ import annotations

import itertools

import numpy as np

_SHIFTS = np.array(list(itertools.product((-1.0, 0.0, 1.0), repeat=3)))
_NONZERO = ~np.all(_SHIFTS == 0.0, axis=1)


def min_image_distance_matrix(frac: np.ndarray, basis: np.ndarray) -> np.ndarray:
    """n x n matrix of minimum-image distances over +-1 cell translations.

    Entry [i, j] for i != j is the minimum of |(f_i - f_j + t) @ basis| over
    the 27 translations t; the diagonal uses the 26 nonzero translations
    (distance of a site to its own nearest periodic image).
    """
    frac = np.asarray(frac, dtype=float)
    basis = np.asarray(basis, dtype=float)
    delta = frac[:, None, :] - frac[None, :, :]  # (n, n, 3)
    shifted = delta[:, :, None, :] + _SHIFTS[None, None, :, :]  # (n, n, 27, 3)
    cart = shifted @ basis
    dist_sq = np.einsum("ijkl,ijkl->ijk", cart, cart)
    out = np.sqrt(np.min(dist_sq, axis=2))
    diag = np.sqrt(np.min(dist_sq[:, :, _NONZERO], axis=2))
    np.fill_diagonal(out, np.diag(diag))
    return out
