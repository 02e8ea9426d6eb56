#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
crisp/core/tensor.py was created on 2024/03/06.
file in :relativeFile

Dense primitives shared by every other module. A dense matrix is a 2-D
C-ordered ``float64`` ndarray, a mask is a 2-D ``bool`` ndarray of the same
shape. Weights use the pruning layout S x K: one row per output channel,
K = H*W*R reduction positions per row.
"""
from typing import Tuple

import numpy as np

from crisp.basic import ConvShape, DimensionError, ArgumentError, Padding


def as_dense(a, name='matrix'):
    # type: (object, str) -> np.ndarray
    """Return ``a`` as a 2-D finite float64 array (copy only if needed)."""
    arr = np.ascontiguousarray(a, dtype=np.float64)
    if arr.ndim != 2:
        raise DimensionError('{} must be 2-D, got shape {}.'.format(name, arr.shape))
    if not np.all(np.isfinite(arr)):
        raise ArgumentError('{} contains NaN or Inf.'.format(name))
    return arr


def as_mask(mask, shape=None, name='mask'):
    # type: (object, Tuple[int, int], str) -> np.ndarray
    m = np.ascontiguousarray(mask).astype(bool, copy=False)
    if m.ndim != 2:
        raise DimensionError('{} must be 2-D, got shape {}.'.format(name, m.shape))
    if shape is not None and m.shape != tuple(shape):
        raise DimensionError('{} shape {} does not match {}.'.format(name, m.shape, tuple(shape)))
    return m


def apply_mask(w, mask):
    # type: (np.ndarray, np.ndarray) -> np.ndarray
    """``w`` with every unmasked position set to +0.0."""
    return np.where(mask, w, 0.0)


def reshape_conv_weight(tensor4d, shape):
    # type: (object, ConvShape) -> np.ndarray
    """Flatten a conv kernel indexed ``[s][r][h][w]`` to the S x (H*W*R) layout.

    Column ``k`` of row ``o`` is input position ``(r, h, w)`` with ``r``
    outermost, i.e. ``k = (r*H + h)*W + w``.
    """
    if min(shape) < 1:
        raise DimensionError('Every conv dimension must be >= 1, got {}.'.format(shape))
    flat = np.asarray(tensor4d, dtype=np.float64).ravel()
    expected = shape.h * shape.w * shape.r * shape.s
    if flat.size != expected:
        raise DimensionError('Conv tensor has {} values, shape {} needs {}.'.format(
            flat.size, tuple(shape), expected))
    return as_dense(flat.reshape(shape.s, shape.r * shape.h * shape.w), 'conv weight')


def unreshape_conv_weight(w, shape):
    # type: (np.ndarray, ConvShape) -> np.ndarray
    """Inverse of :func:`reshape_conv_weight`; returns an ``[s][r][h][w]`` array."""
    w = np.asarray(w, dtype=np.float64)
    if w.shape != (shape.s, shape.r * shape.h * shape.w):
        raise DimensionError('Matrix shape {} does not match conv shape {}.'.format(
            w.shape, tuple(shape)))
    return w.reshape(shape.s, shape.r, shape.h, shape.w).copy()


def pad_to_blocks(m, b):
    # type: (np.ndarray, int) -> Tuple[np.ndarray, Padding]
    """Zero-pad rows and columns of ``m`` up to multiples of ``b``."""
    if b < 1:
        raise ArgumentError('Block size must be >= 1, got {}.'.format(b))
    m = np.asarray(m)
    rows, cols = m.shape
    pad_rows = -rows % b
    pad_cols = -cols % b
    record = Padding(rows, cols, pad_rows, pad_cols)
    if pad_rows == 0 and pad_cols == 0:
        return m.copy(), record
    padded = np.zeros((rows + pad_rows, cols + pad_cols), dtype=m.dtype)
    padded[:rows, :cols] = m
    return padded, record


def unpad_blocks(m, padding):
    # type: (np.ndarray, Padding) -> np.ndarray
    return np.asarray(m)[:padding.orig_rows, :padding.orig_cols].copy()


def matmul_dense(a, w):
    # type: (np.ndarray, np.ndarray) -> np.ndarray
    """Reference ``a @ w.T`` for ``a`` (batch x K) and ``w`` (S x K).

    Products are accumulated over ``k`` in ascending order, one rank-1 update
    at a time, so the result is bit-identical to a scalar triple loop and
    does not depend on the BLAS build or thread count.
    """
    a = as_dense(a, 'activations')
    w = as_dense(w, 'weights')
    if a.shape[1] != w.shape[1]:
        raise DimensionError('Inner dimensions differ: activations have K={}, weights K={}.'.format(
            a.shape[1], w.shape[1]))
    out = np.zeros((a.shape[0], w.shape[0]), dtype=np.float64)
    for k in range(a.shape[1]):
        out += a[:, k, None] * w[None, :, k]
    return out
