"""Distance-kernel tests: backend selection, cross-backend agreement, oracle."""

from __future__ import annotations

import itertools
import math

import numpy as np
import pytest

from matnav._kernels import (
    BACKEND,
    min_image_distance_matrix,
    min_image_distance_matrix_numpy,
)

IMPLS = [
    pytest.param(min_image_distance_matrix, id="active"),
    pytest.param(min_image_distance_matrix_numpy, id="numpy"),
]


def _oracle(frac, basis):
    """Triple-loop reference: scan all 27 translations with scalar math."""
    frac = np.asarray(frac, dtype=float)
    basis = np.asarray(basis, dtype=float)
    n = len(frac)
    out = np.zeros((n, n))
    shifts = list(itertools.product((-1, 0, 1), repeat=3))
    for i in range(n):
        for j in range(n):
            best = math.inf
            for t in shifts:
                if i == j and t == (0, 0, 0):
                    continue
                d = [frac[i][k] - frac[j][k] + t[k] for k in range(3)]
                cart = [
                    d[0] * basis[0][m] + d[1] * basis[1][m] + d[2] * basis[2][m]
                    for m in range(3)
                ]
                best = min(best, math.sqrt(sum(c * c for c in cart)))
            out[i, j] = best
    return out


def _random_case(rng, n):
    frac = rng.random((n, 3))
    basis = np.diag([3.0, 4.0, 5.0]) + rng.normal(0.0, 0.3, (3, 3))
    return frac, basis


class TestBackendSelection:
    def test_backend_is_named(self):
        assert BACKEND in ("cython", "numpy")

    def test_numpy_fallback_always_importable(self):
        frac = np.array([[0.0, 0.0, 0.0]])
        basis = np.eye(3) * 2.0
        out = min_image_distance_matrix_numpy(frac, basis)
        assert out.shape == (1, 1)

    def test_active_backend_matches_report(self):
        if BACKEND == "numpy":
            assert min_image_distance_matrix is min_image_distance_matrix_numpy
        else:
            assert min_image_distance_matrix is not min_image_distance_matrix_numpy


class TestAgreement:
    @pytest.mark.parametrize("n", [1, 2, 5, 24, 60])
    def test_backends_agree(self, n):
        rng = np.random.default_rng(n)
        frac, basis = _random_case(rng, n)
        a = min_image_distance_matrix(frac, basis)
        b = min_image_distance_matrix_numpy(frac, basis)
        np.testing.assert_allclose(a, b, rtol=0.0, atol=1e-12)

    @pytest.mark.parametrize("impl", IMPLS)
    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_matches_triple_loop_oracle(self, impl, seed):
        rng = np.random.default_rng(seed)
        frac, basis = _random_case(rng, 6)
        np.testing.assert_allclose(impl(frac, basis), _oracle(frac, basis), atol=1e-9)


class TestSemantics:
    @pytest.mark.parametrize("impl", IMPLS)
    def test_two_sites_wrap_across_boundary(self, impl):
        # 0.0 and 0.6 along x in a 5 A cube: direct image 3.0, wrapped 2.0
        frac = np.array([[0.0, 0.0, 0.0], [0.6, 0.0, 0.0]])
        out = impl(frac, np.eye(3) * 5.0)
        assert out[0, 1] == pytest.approx(2.0, abs=1e-12)

    @pytest.mark.parametrize("impl", IMPLS)
    def test_diagonal_is_nearest_self_image(self, impl):
        frac = np.array([[0.25, 0.5, 0.75]])
        out = impl(frac, np.diag([2.0, 3.0, 9.0]))
        assert out[0, 0] == pytest.approx(2.0, abs=1e-12)

    @pytest.mark.parametrize("impl", IMPLS)
    def test_symmetric_with_positive_entries(self, impl):
        rng = np.random.default_rng(7)
        frac, basis = _random_case(rng, 12)
        out = impl(frac, basis)
        assert out.shape == (12, 12)
        np.testing.assert_allclose(out, out.T, atol=1e-12)
        assert (out > 0.0).all()

    @pytest.mark.parametrize("impl", IMPLS)
    def test_rigid_translation_invariance(self, impl):
        rng = np.random.default_rng(11)
        frac, basis = _random_case(rng, 8)
        shifted = (frac + np.array([0.31, 0.77, 0.05])) % 1.0
        np.testing.assert_allclose(impl(frac, basis), impl(shifted, basis), atol=1e-9)

    @pytest.mark.parametrize("impl", IMPLS)
    def test_permutation_equivariance(self, impl):
        rng = np.random.default_rng(13)
        frac, basis = _random_case(rng, 9)
        perm = rng.permutation(9)
        full = impl(frac, basis)
        np.testing.assert_allclose(
            impl(frac[perm], basis), full[np.ix_(perm, perm)], atol=1e-12
        )

    @pytest.mark.parametrize("impl", IMPLS)
    def test_empty_input(self, impl):
        out = impl(np.empty((0, 3)), np.eye(3))
        assert out.shape == (0, 0)


class TestInputHandling:
    @pytest.mark.parametrize("impl", IMPLS)
    def test_read_only_arrays_accepted(self, impl):
        # Lattice freezes its basis array, so read-only must work
        rng = np.random.default_rng(17)
        frac, basis = _random_case(rng, 5)
        expected = impl(frac, basis)
        frac.setflags(write=False)
        basis.setflags(write=False)
        np.testing.assert_array_equal(impl(frac, basis), expected)

    @pytest.mark.parametrize("impl", IMPLS)
    def test_non_contiguous_arrays_accepted(self, impl):
        rng = np.random.default_rng(19)
        frac, basis = _random_case(rng, 6)
        expected = impl(frac, basis)
        padded = np.zeros((12, 3))
        padded[::2] = frac
        np.testing.assert_allclose(impl(padded[::2], basis), expected, atol=1e-15)
        np.testing.assert_allclose(
            impl(frac, np.asfortranarray(basis)), expected, atol=1e-15
        )

    @pytest.mark.parametrize("impl", IMPLS)
    def test_list_and_integer_inputs_coerced(self, impl):
        out = impl([[0, 0, 0], [0.5, 0.5, 0.5]], np.eye(3, dtype=int) * 2)
        assert out[0, 1] == pytest.approx(math.sqrt(3.0), abs=1e-12)
