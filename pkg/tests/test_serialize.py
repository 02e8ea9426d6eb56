#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
tests/test_serialize.py was created on 2024/03/29.
file in :relativeFile
"""
import os
import tempfile
import unittest

import numpy as np
from numpy.testing import assert_array_equal

from crisp.basic import CorruptionError, FormatError, NmConfig
from crisp.sparse.hybrid import decode, encode, random_hybrid_mask
from crisp.sparse.serialize import HEADER_SIZE, deserialize, read_crsp, read_header, serialize, write_crsp


def _random_matrix(seed, nm=NmConfig(2, 4), b=4, rows=8, cols=16, kc=2):
    rng = np.random.RandomState(seed)
    mask = random_hybrid_mask(rows, cols, nm, b, kc, rng)
    return encode(rng.standard_normal((rows, cols)), mask, nm, b)


class TestSerialize(unittest.TestCase):

    def assertSameMatrix(self, a, b):
        self.assertEqual((a.orig_rows, a.orig_cols, a.nm, a.b, a.kept_cols_per_blockrow),
                         (b.orig_rows, b.orig_cols, b.nm, b.b, b.kept_cols_per_blockrow))
        assert_array_equal(a.block_col_indices, b.block_col_indices)
        assert_array_equal(a.offsets, b.offsets)
        assert_array_equal(a.values, b.values)

    def test_round_trip(self):
        for seed, nm in enumerate([NmConfig(1, 4), NmConfig(2, 4), NmConfig(3, 4), NmConfig(2, 8)]):
            h = _random_matrix(seed, nm=nm, b=8, rows=16, cols=32, kc=seed % 4 + 1)
            back = deserialize(serialize(h))
            self.assertSameMatrix(h, back)
            assert_array_equal(decode(back), decode(h))

    def test_empty_matrix(self):
        h = encode(np.zeros((0, 0)), np.zeros((0, 0), dtype=bool), NmConfig(2, 4), 4)
        data = serialize(h)
        self.assertEqual(len(data), HEADER_SIZE)
        self.assertSameMatrix(h, deserialize(data))

    def test_header(self):
        header = read_header(serialize(_random_matrix(1)))
        self.assertEqual(header['orig_rows'], 8)
        self.assertEqual(header['orig_cols'], 16)
        self.assertEqual((header['n'], header['m'], header['b']), (2, 4, 4))
        self.assertEqual(header['kept_cols_per_blockrow'], 2)

    def test_bad_magic(self):
        data = bytearray(serialize(_random_matrix(2)))
        data[0] ^= 0xFF
        with self.assertRaises(FormatError):
            deserialize(bytes(data))

    def test_bad_version(self):
        data = bytearray(serialize(_random_matrix(2)))
        data[4] = 99
        with self.assertRaises(FormatError):
            deserialize(bytes(data))

    def test_truncated_and_trailing(self):
        data = serialize(_random_matrix(3))
        with self.assertRaises(FormatError):
            deserialize(data[:HEADER_SIZE - 1])
        with self.assertRaises(FormatError):
            deserialize(data[:-1])
        with self.assertRaises(FormatError):
            deserialize(data + b'\x00')

    def test_corrupted_offsets(self):
        h = _random_matrix(4)
        data = bytearray(serialize(h))
        first_offset = HEADER_SIZE + 2 * h.block_col_indices.size
        data[first_offset] = 9
        with self.assertRaises(CorruptionError):
            deserialize(bytes(data))

    def test_file_round_trip(self):
        h = _random_matrix(5)
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, 'layer.crsp')
            write_crsp(path, h)
            self.assertSameMatrix(h, read_crsp(path))


if __name__ == '__main__':
    unittest.main()
