# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled minimum-image distance kernel.

Mirrors _numpy_impl.min_image_distance_matrix; the pure-numpy module is the
reference implementation and both are cross-checked in tests.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()


def min_image_distance_matrix(frac, basis):
    # const views: inputs are often read-only (Lattice freezes its basis)
    f_arr = np.ascontiguousarray(frac, dtype=np.float64)
    b_arr = np.ascontiguousarray(basis, dtype=np.float64)
    cdef const double[:, ::1] fv = f_arr
    cdef const double[:, ::1] bv = b_arr
    cdef Py_ssize_t n = fv.shape[0]
    out = np.empty((n, n), dtype=np.float64)
    cdef double[:, ::1] ov = out

    cdef Py_ssize_t i, j
    cdef int ta, tb, tc
    cdef double dx, dy, dz, cx, cy, cz, dsq, best
    cdef double fa, fb, fc

    with nogil:
        for i in range(n):
            for j in range(i, n):
                best = -1.0
                fa = fv[i, 0] - fv[j, 0]
                fb = fv[i, 1] - fv[j, 1]
                fc = fv[i, 2] - fv[j, 2]
                for ta in range(-1, 2):
                    for tb in range(-1, 2):
                        for tc in range(-1, 2):
                            if i == j and ta == 0 and tb == 0 and tc == 0:
                                continue
                            dx = fa + ta
                            dy = fb + tb
                            dz = fc + tc
                            cx = dx * bv[0, 0] + dy * bv[1, 0] + dz * bv[2, 0]
                            cy = dx * bv[0, 1] + dy * bv[1, 1] + dz * bv[2, 1]
                            cz = dx * bv[0, 2] + dy * bv[1, 2] + dz * bv[2, 2]
                            dsq = cx * cx + cy * cy + cz * cz
                            if best < 0.0 or dsq < best:
                                best = dsq
                ov[i, j] = sqrt(best)
                ov[j, i] = ov[i, j]
    return out
