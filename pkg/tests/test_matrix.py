"""Matrix kernel: products, elementwise ops, and seeded initialization."""

import numpy as np
import pytest

from nutsort.errors import ShapeError
from nutsort.matrix import (
    as_matrix,
    elementwise,
    glorot_init,
    make_rng,
    map_scalar,
    matmul,
    transpose,
)


class TestMatmul:
    def test_hand_computed_product(self):
        a = as_matrix([[1.0, 2.0], [3.0, 4.0]])
        b = as_matrix([[5.0], [6.0]])
        np.testing.assert_array_equal(matmul(a, b), [[17.0], [39.0]])

    def test_identity_is_neutral(self):
        rng = make_rng(0)
        a = rng.normal(size=(4, 4))
        np.testing.assert_array_equal(matmul(a, np.eye(4)), a)

    def test_mismatch_names_both_shapes(self):
        a = np.zeros((2, 3))
        b = np.zeros((2, 2))
        with pytest.raises(ShapeError, match=r"\(2, 3\).*\(2, 2\)"):
            matmul(a, b)

    def test_rejects_non_2d(self):
        with pytest.raises(ShapeError):
            matmul(np.zeros(3), np.zeros((3, 2)))

    def test_matches_loop_reference(self):
        rng = make_rng(1)
        a = rng.normal(size=(3, 5))
        b = rng.normal(size=(5, 2))
        want = np.zeros((3, 2))
        for i in range(3):
            for j in range(2):
                want[i, j] = sum(a[i, t] * b[t, j] for t in range(5))
        np.testing.assert_allclose(matmul(a, b), want, rtol=1e-13)


class TestElementwise:
    def test_mul_hand_case(self):
        out = elementwise(as_matrix([[2.0, 3.0]]), as_matrix([[4.0, 5.0]]), "mul")
        np.testing.assert_array_equal(out, [[8.0, 15.0]])

    def test_add_sub_roundtrip(self):
        # integer-valued entries so (a + b) - b carries no rounding
        rng = make_rng(2)
        a = rng.integers(-50, 50, size=(2, 3)).astype(np.float64)
        b = rng.integers(-50, 50, size=(2, 3)).astype(np.float64)
        np.testing.assert_array_equal(elementwise(elementwise(a, b, "add"), b, "sub"), a)

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            elementwise(np.zeros((2, 2)), np.zeros((2, 3)), "add")

    def test_unknown_op(self):
        with pytest.raises(ValueError, match="div"):
            elementwise(np.zeros((1, 1)), np.zeros((1, 1)), "div")


class TestTransposeAndMap:
    def test_double_transpose_bitwise(self):
        rng = make_rng(3)
        a = rng.normal(size=(3, 5))
        np.testing.assert_array_equal(transpose(transpose(a)), a)

    def test_map_scalar(self):
        out = map_scalar(as_matrix([[1.0, -2.0]]), lambda v: v * v)
        np.testing.assert_array_equal(out, [[1.0, 4.0]])


class TestAsMatrix:
    def test_coerces_lists(self):
        m = as_matrix([[1, 2], [3, 4]])
        assert m.dtype == np.float64 and m.shape == (2, 2)

    def test_rejects_1d(self):
        with pytest.raises(ShapeError):
            as_matrix([1, 2, 3])


class TestGlorotInit:
    def test_bounds(self):
        w = glorot_init(40, 60, make_rng(0))
        r = np.sqrt(6.0 / 100.0)
        assert w.shape == (40, 60)
        assert np.all(np.abs(w) <= r)

    def test_same_seed_bitwise_equal(self):
        a = glorot_init(7, 5, make_rng(123))
        b = glorot_init(7, 5, make_rng(123))
        np.testing.assert_array_equal(a, b)

    def test_different_seeds_differ(self):
        a = glorot_init(7, 5, make_rng(0))
        b = glorot_init(7, 5, make_rng(1))
        assert not np.array_equal(a, b)

    def test_consumes_generator(self):
        rng = make_rng(9)
        a = glorot_init(3, 3, rng)
        b = glorot_init(3, 3, rng)
        assert not np.array_equal(a, b)

    def test_rejects_bad_dims(self):
        with pytest.raises(ShapeError):
            glorot_init(0, 3, make_rng(0))


class TestMakeRng:
    def test_streams_are_reproducible(self):
        x = make_rng(42).uniform(size=10)
        y = make_rng(42).uniform(size=10)
        np.testing.assert_array_equal(x, y)
