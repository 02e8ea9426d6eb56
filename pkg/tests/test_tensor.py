#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
tests/test_tensor.py was created on 2024/03/08.
file in :relativeFile
"""
import unittest

import numpy as np
from numpy.testing import assert_array_equal

from crisp.basic import ArgumentError, ConvShape, DimensionError, Padding
from crisp.core.tensor import (apply_mask, as_dense, as_mask, matmul_dense, pad_to_blocks,
                               reshape_conv_weight, unpad_blocks, unreshape_conv_weight)


class TestConvReshape(unittest.TestCase):

    def test_single_value(self):
        out = reshape_conv_weight([[[[2.5]]]], ConvShape(1, 1, 1, 1))
        assert_array_equal(out, [[2.5]])

    def test_row_is_output_channel(self):
        # [s][r][h][w] with h=w=1, r=4, s=2
        tensor = np.arange(8, dtype=float).reshape(2, 4, 1, 1)
        out = reshape_conv_weight(tensor, ConvShape(1, 1, 4, 2))
        self.assertEqual(out.shape, (2, 4))
        assert_array_equal(out[0], [0, 1, 2, 3])
        assert_array_equal(out[1], [4, 5, 6, 7])

    def test_round_trip(self):
        rng = np.random.RandomState(0)
        for _ in range(50):
            shape = ConvShape(*rng.randint(1, 6, size=4))
            tensor = rng.standard_normal((shape.s, shape.r, shape.h, shape.w))
            back = unreshape_conv_weight(reshape_conv_weight(tensor, shape), shape)
            assert_array_equal(back, tensor)

    def test_size_mismatch(self):
        with self.assertRaises(DimensionError):
            reshape_conv_weight(np.zeros(7), ConvShape(1, 1, 4, 2))
        with self.assertRaises(DimensionError):
            reshape_conv_weight(np.zeros(0), ConvShape(0, 1, 1, 1))


class TestPadding(unittest.TestCase):

    def test_aligned(self):
        m = np.arange(16, dtype=float).reshape(4, 4)
        padded, padding = pad_to_blocks(m, 4)
        assert_array_equal(padded, m)
        self.assertEqual(padding, Padding(4, 4, 0, 0))

    def test_ceiling(self):
        m = np.ones((5, 7))
        padded, padding = pad_to_blocks(m, 4)
        self.assertEqual(padded.shape, (8, 8))
        self.assertEqual((padding.pad_rows, padding.pad_cols), (3, 1))
        self.assertEqual(padded[5:].sum() + padded[:, 7:].sum(), 0)
        assert_array_equal(unpad_blocks(padded, padding), m)

    def test_bad_block(self):
        with self.assertRaises(ArgumentError):
            pad_to_blocks(np.ones((2, 2)), 0)


class TestMatmul(unittest.TestCase):

    def test_hand_dot(self):
        assert_array_equal(matmul_dense([[1.0, 2.0]], [[3.0, 4.0]]), [[11.0]])

    def test_identity_activation(self):
        w = np.random.RandomState(1).standard_normal((3, 5))
        assert_array_equal(matmul_dense(np.eye(5), w), w.T)

    def test_triple_loop(self):
        rng = np.random.RandomState(2)
        a, w = rng.standard_normal((3, 8)), rng.standard_normal((4, 8))
        expected = np.zeros((3, 4))
        for i in range(3):
            for o in range(4):
                acc = 0.0
                for k in range(8):
                    acc += a[i, k] * w[o, k]
                expected[i, o] = acc
        assert_array_equal(matmul_dense(a, w), expected)

    def test_inner_dims(self):
        with self.assertRaises(DimensionError):
            matmul_dense(np.ones((2, 3)), np.ones((2, 4)))


class TestValidators(unittest.TestCase):

    def test_as_dense(self):
        self.assertEqual(as_dense([[1, 2]]).dtype, np.float64)
        with self.assertRaises(DimensionError):
            as_dense([1.0, 2.0])
        with self.assertRaises(ArgumentError):
            as_dense([[np.nan]])

    def test_as_mask(self):
        with self.assertRaises(DimensionError):
            as_mask(np.ones((2, 2)), (2, 3))

    def test_apply_mask_positive_zero(self):
        out = apply_mask(np.array([[-1.0, 2.0]]), np.array([[False, True]]))
        assert_array_equal(out, [[0.0, 2.0]])
        self.assertFalse(np.signbit(out[0, 0]))


if __name__ == '__main__':
    unittest.main()
