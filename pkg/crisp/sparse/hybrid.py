#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
crisp/sparse/hybrid.py was created on 2024/03/25.
file in :relativeFile

Hybrid structured sparsity: N:M groups inside the B x B blocks that survive
block pruning, with the same number of kept blocks in every block row.

Storage (``HybridSparseMatrix``):
    block_col_indices   Blocked-Ellpack, one ascending row of kept block
                        columns per block row.
    offsets             N intra-group positions per kept group of M.
    values              the matching N values per group.
Offsets and values are ordered block row, kept block column, row inside the
block, group inside the row, offset.
"""
from typing import NamedTuple

import numpy as np

from crisp.basic import (NmConfig, ValidationReport, Violation, DimensionError, PatternError,
                         CorruptionError, ArgumentError, check_block)
from crisp.core.tensor import apply_mask, as_dense, as_mask

MAX_GROUP_SIZE = 255


class HybridSparseMatrix(NamedTuple):
    orig_rows: int
    orig_cols: int
    nm: NmConfig
    b: int
    kept_cols_per_blockrow: int
    block_col_indices: np.ndarray
    offsets: np.ndarray
    values: np.ndarray

    @property
    def block_rows(self):
        # type: () -> int
        return self.orig_rows // self.b

    @property
    def block_cols(self):
        # type: () -> int
        return self.orig_cols // self.b

    @property
    def k_prime(self):
        # type: () -> int
        return self.kept_cols_per_blockrow * self.b

    @property
    def nnz(self):
        # type: () -> int
        return int(self.values.size)

    @property
    def shape(self):
        return self.orig_rows, self.orig_cols

    @property
    def overall_sparsity(self):
        # type: () -> float
        if self.orig_cols == 0:
            return 1.0
        return 1.0 - (self.k_prime / self.orig_cols) * self.nm.density


def _check_divisible(shape, b):
    rows, cols = shape
    if rows % b or cols % b:
        raise DimensionError('Shape {}x{} is not divisible by block size {}.'.format(rows, cols, b))


def block_keep_flags(mask, b):
    # type: (np.ndarray, int) -> np.ndarray
    """Per-block flag, True where the B x B block holds at least one kept weight."""
    mask = as_mask(mask)
    _check_divisible(mask.shape, b)
    rows, cols = mask.shape
    return mask.reshape(rows // b, b, cols // b, b).any(axis=(1, 3))


def validate_pattern(mask, nm, b):
    # type: (np.ndarray, NmConfig, int) -> ValidationReport
    """Check ``mask`` against the hybrid pattern.

    A block is kept when any of its bits is set. The mask is valid when every
    block row keeps the same number of blocks and no aligned group of ``m``
    elements along a row holds more than ``n`` ones.
    """
    b = check_block(b, nm)
    mask = as_mask(mask)
    _check_divisible(mask.shape, b)
    rows, cols = mask.shape
    violations = []

    kept = block_keep_flags(mask, b)
    counts = kept.sum(axis=1)
    if counts.size and np.any(counts != counts[0]):
        reference = int(np.bincount(counts).argmax())
        for block_row in np.flatnonzero(counts != reference):
            # an extra kept block, or the first missing one
            if counts[block_row] > reference:
                block_col = np.flatnonzero(kept[block_row])[-1]
            else:
                block_col = np.flatnonzero(~kept[block_row])[0]
            violations.append(Violation(
                'uneven_block_rows', (int(block_row), int(block_col)),
                'block row {} keeps {} blocks, other rows keep {}'.format(
                    block_row, counts[block_row], reference)))

    group_counts = mask.reshape(rows, cols // nm.m, nm.m).sum(axis=2)
    for row, group in zip(*np.nonzero(group_counts > nm.n)):
        violations.append(Violation(
            'group_overflow', (int(row), int(group)),
            'row {} group {} keeps {} of {}, limit {}'.format(
                row, group, group_counts[row, group], nm.m, nm.n)))

    return ValidationReport(not violations, violations)


def encode(w, mask, nm, b):
    # type: (np.ndarray, np.ndarray, NmConfig, int) -> HybridSparseMatrix
    """Compress ``w ⊙ mask`` into a :class:`HybridSparseMatrix`.

    Groups of a kept block with fewer than ``n`` ones are completed with the
    smallest unused positions, which store 0.0, so every kept group holds
    exactly ``n`` values.
    """
    if nm.m > MAX_GROUP_SIZE:
        raise ArgumentError('Group size {} does not fit one offset byte.'.format(nm.m))
    w = as_dense(w, 'weights')
    mask = as_mask(mask, w.shape)
    report = validate_pattern(mask, nm, b)
    if not report.ok:
        raise PatternError('Mask violates the {} / {}x{} hybrid pattern: {}'.format(
            nm, b, b, report.summary()), report)

    rows, cols = w.shape
    block_rows, block_cols, groups = rows // b, cols // b, b // nm.m
    kept = block_keep_flags(mask, b)
    kc = int(kept[0].sum()) if block_rows else 0
    indices = np.nonzero(kept)[1].reshape(block_rows, kc).astype(np.int64)

    def gather(a):
        tiles = a.reshape(block_rows, b, block_cols, b).transpose(0, 2, 1, 3)
        tiles = np.take_along_axis(tiles, indices[:, :, None, None], axis=1)
        return tiles.reshape(block_rows, kc, b, groups, nm.m)

    vals = gather(apply_mask(w, mask))
    bits = gather(mask)
    # kept slots first, then unused slots, each in position order
    key = (~bits).astype(np.int64) * nm.m + np.arange(nm.m)
    offsets = np.sort(np.argsort(key, axis=-1, kind='stable')[..., :nm.n], axis=-1)
    values = np.take_along_axis(vals, offsets, axis=-1)

    return HybridSparseMatrix(
        orig_rows=rows, orig_cols=cols, nm=nm, b=b, kept_cols_per_blockrow=kc,
        block_col_indices=indices,
        offsets=offsets.astype(np.uint8).ravel(),
        values=np.ascontiguousarray(values, dtype=np.float64).ravel())


def check_well_formed(h):
    # type: (HybridSparseMatrix) -> None
    """Raise :class:`CorruptionError` unless every invariant of ``h`` holds."""
    nm, b = h.nm, h.b
    if b < 1 or b % nm.m:
        raise CorruptionError('Block size {} is not a multiple of m={}.'.format(b, nm.m))
    if h.orig_rows < 0 or h.orig_cols < 0 or h.orig_rows % b or h.orig_cols % b:
        raise CorruptionError('Shape {}x{} is not block aligned for b={}.'.format(
            h.orig_rows, h.orig_cols, b))
    kc = h.kept_cols_per_blockrow
    if not 0 <= kc <= h.block_cols:
        raise CorruptionError('{} kept blocks per row, only {} block columns.'.format(kc, h.block_cols))

    indices = np.asarray(h.block_col_indices)
    if indices.shape != (h.block_rows, kc):
        raise CorruptionError('Block index table has shape {}, expected {}.'.format(
            indices.shape, (h.block_rows, kc)))
    if indices.size:
        if indices.min() < 0 or indices.max() >= h.block_cols:
            raise CorruptionError('Block column index out of range [0, {}).'.format(h.block_cols))
        if kc > 1 and np.any(np.diff(indices, axis=1) <= 0):
            raise CorruptionError('Block column indices are not strictly ascending.')

    expected = h.orig_rows * kc * b * nm.n // nm.m
    if h.values.size != expected or h.offsets.size != expected:
        raise CorruptionError('Expected {} values and offsets, found {} and {}.'.format(
            expected, h.values.size, h.offsets.size))
    if expected:
        offsets = np.asarray(h.offsets).reshape(-1, nm.n)
        if offsets.max() >= nm.m:
            raise CorruptionError('Offset {} out of range [0, {}).'.format(offsets.max(), nm.m))
        if nm.n > 1 and np.any(np.diff(offsets.astype(np.int64), axis=1) <= 0):
            raise CorruptionError('Offsets inside a group are not strictly ascending.')
        if not np.all(np.isfinite(h.values)):
            raise CorruptionError('Stored values contain NaN or Inf.')


def decode(h):
    # type: (HybridSparseMatrix) -> np.ndarray
    """Expand ``h`` back to a dense S x K matrix with zeros at pruned positions."""
    check_well_formed(h)
    nm, b = h.nm, h.b
    block_rows, block_cols = h.block_rows, h.block_cols
    kc, groups = h.kept_cols_per_blockrow, b // nm.m

    shape = (block_rows, kc, b, groups, nm.n)
    grouped = np.zeros((block_rows, kc, b, groups, nm.m), dtype=np.float64)
    np.put_along_axis(grouped, h.offsets.reshape(shape).astype(np.intp),
                      h.values.reshape(shape), axis=-1)

    tiles = np.zeros((block_rows, block_cols, b, b), dtype=np.float64)
    tiles[np.arange(block_rows)[:, None], h.block_col_indices] = grouped.reshape(block_rows, kc, b, b)
    return tiles.transpose(0, 2, 1, 3).reshape(h.orig_rows, h.orig_cols)


def random_hybrid_mask(rows, cols, nm, b, kc, rng, fill=1.0):
    # type: (int, int, NmConfig, int, int, np.random.RandomState, float) -> np.ndarray
    """A random mask that satisfies the hybrid pattern.

    Every block row keeps ``kc`` random block columns. Inside them each group
    of ``m`` keeps ``n`` random positions, and each of those survives with
    probability ``fill`` (the first position of a group always survives, so
    kept blocks are never empty).
    """
    b = check_block(b, nm)
    _check_divisible((rows, cols), b)
    block_rows, block_cols = rows // b, cols // b
    if not 0 <= kc <= block_cols:
        raise ArgumentError('kc={} outside [0, {}].'.format(kc, block_cols))

    tiles = np.zeros((block_rows, block_cols, b, b // nm.m, nm.m), dtype=bool)
    for r in range(block_rows):
        for c in rng.choice(block_cols, kc, replace=False):
            order = np.argsort(rng.random_sample((b, b // nm.m, nm.m)), axis=-1)[..., :nm.n]
            keep = rng.random_sample(order.shape) < fill
            keep[..., 0] = True
            np.put_along_axis(tiles[r, c], order, keep, axis=-1)
    return tiles.reshape(block_rows, block_cols, b, b).transpose(0, 2, 1, 3).reshape(rows, cols)
