#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
crisp/pruner/saliency.py was created on 2024/04/12.
file in :relativeFile

Scoring, ranking and selection steps of one pruning iteration.

A layer's saliency is scored per B x B block, every block row is sorted
ascending, and the column sums of the sorted grid give one score per rank
column. Ranks from every layer are merged into one global order. The
cheapest ranks are pruned until the target sparsity is met, which removes
the same number of blocks from every block row of a layer.
"""
from typing import List
from typing import NamedTuple
from typing import Optional
from typing import Sequence

import numpy as np

from crisp.basic import (ArgumentError, DimensionError, LayerStats, NmConfig, RankColumnScore,
                         ScheduleError)
from crisp.core.tensor import as_dense, as_mask
from crisp.depens import logging
from crisp.sparse.hybrid import block_keep_flags

_logger = logging.get_logger(__name__)

SPARSITY_TOL = 1e-12


class BlockScoreGrid(NamedTuple):
    """Block scores of one layer.

    Attributes:
        scores:
            ``(S/B) x (K/B)`` sums of saliency over the surviving elements of
            each block.
        row_perms:
            Per block row, the block columns in ascending score order, or
            ``None`` before :func:`row_sort`.
        block_keep:
            ``True`` where the block currently holds a kept weight.
        b:
            Block edge.
    """
    scores: np.ndarray
    row_perms: Optional[np.ndarray]
    block_keep: np.ndarray
    b: int

    def sorted_scores(self):
        # type: () -> np.ndarray
        if self.row_perms is None:
            raise ArgumentError('Grid is not row sorted yet.')
        return np.take_along_axis(self.scores, self.row_perms, axis=1)


def layer_stats(shape, b):
    # type: (Sequence[int], int) -> LayerStats
    rows, cols = shape
    return LayerStats(rows, cols, rows + (-rows % b), cols + (-cols % b), b)


def class_saliency(weights, grad_accum, sample_count):
    # type: (np.ndarray, np.ndarray, int) -> np.ndarray
    """``|(grad_accum / H) * weights|`` elementwise."""
    if sample_count < 1:
        raise ArgumentError('Saliency needs at least one sample, got H={}.'.format(sample_count))
    weights = as_dense(weights, 'weights')
    grad_accum = as_dense(grad_accum, 'gradients')
    if weights.shape != grad_accum.shape:
        raise DimensionError('Weights {} and gradients {} differ in shape.'.format(
            weights.shape, grad_accum.shape))
    return np.abs((grad_accum / sample_count) * weights)


def expand_blocks(block_keep, b):
    # type: (np.ndarray, int) -> np.ndarray
    """Element mask that is ``True`` inside every kept block."""
    return np.repeat(np.repeat(np.asarray(block_keep, dtype=bool), b, axis=0), b, axis=1)


def nm_project(saliency, nm, block_keep=None, b=None, valid=None):
    # type: (np.ndarray, NmConfig, Optional[np.ndarray], Optional[int], Optional[np.ndarray]) -> np.ndarray
    """Keep the ``n`` most salient positions of every aligned group of ``m``.

    Ties go to the lower column. With ``block_keep`` (and its ``b``), groups
    outside the kept blocks are cleared. ``valid`` marks the real positions
    of a padded layer: padding never takes one of the ``n`` places and is
    never kept.
    """
    saliency = as_dense(saliency, 'saliency')
    rows, cols = saliency.shape
    if cols % nm.m:
        raise DimensionError('{} columns are not divisible by m={}.'.format(cols, nm.m))
    if valid is not None:
        valid = as_mask(valid, saliency.shape)
        saliency = np.where(valid, saliency, -np.inf)
    groups = saliency.reshape(rows, cols // nm.m, nm.m)
    top = np.argsort(-groups, axis=2, kind='stable')[:, :, :nm.n]
    mask = np.zeros(groups.shape, dtype=bool)
    np.put_along_axis(mask, top, True, axis=2)
    mask = mask.reshape(rows, cols)
    if valid is not None:
        mask &= valid
    if block_keep is not None:
        if b is None:
            raise ArgumentError('A block keep grid needs its block size b.')
        expanded = expand_blocks(block_keep, b)
        if expanded.shape != mask.shape:
            raise DimensionError('Block grid covers {}, saliency is {}.'.format(expanded.shape, mask.shape))
        mask &= expanded
    return mask


def block_scores(saliency, mask, b):
    # type: (np.ndarray, np.ndarray, int) -> BlockScoreGrid
    saliency = as_dense(saliency, 'saliency')
    mask = as_mask(mask, saliency.shape)
    rows, cols = saliency.shape
    if rows % b or cols % b:
        raise DimensionError('Shape {}x{} is not divisible by block size {}.'.format(rows, cols, b))
    scores = np.where(mask, saliency, 0.0).reshape(rows // b, b, cols // b, b).sum(axis=(1, 3))
    return BlockScoreGrid(scores, None, block_keep_flags(mask, b), b)


def row_sort(grid):
    # type: (BlockScoreGrid) -> BlockScoreGrid
    """Attach per-row ascending permutations.

    Equal scores keep block-column order, except that an already pruned
    block sorts before a kept block of the same score.
    """
    kept = grid.block_keep.astype(np.int8)
    perms = np.lexsort((kept, grid.scores), axis=-1) if grid.scores.size else \
        np.zeros(grid.scores.shape, dtype=np.intp)
    return grid._replace(row_perms=perms)


def column_aggregate(grid, layer=0, kept_mask=None):
    # type: (BlockScoreGrid, int, Optional[np.ndarray]) -> List[RankColumnScore]
    """One score per rank column, the column sums of the row-sorted grid.

    Without ``kept_mask`` a rank column removes every element of its
    blocks. With it, the removal is the number of kept weights in the
    blocks at that rank.
    """
    sorted_scores = grid.sorted_scores()
    sums = sorted_scores.sum(axis=0)
    if kept_mask is None:
        removed = [sorted_scores.shape[0] * grid.b * grid.b] * len(sums)
    else:
        kept_mask = as_mask(kept_mask)
        rows, cols = kept_mask.shape
        b = grid.b
        if (rows // b, cols // b) != grid.scores.shape or rows % b or cols % b:
            raise DimensionError('Mask {} does not match a {} block grid.'.format(
                kept_mask.shape, grid.scores.shape))
        per_block = kept_mask.reshape(rows // b, b, cols // b, b).sum(axis=(1, 3))
        removed = np.take_along_axis(per_block, grid.row_perms, axis=1).sum(axis=0)
    return [RankColumnScore(layer, rank, float(c), int(r)) for rank, (c, r) in enumerate(zip(sums, removed))]


def global_rank(all_layers):
    # type: (Sequence[Sequence[RankColumnScore]]) -> List[RankColumnScore]
    """Merge every layer's rank columns, ascending by score then (layer, rank)."""
    merged = [entry for layer in all_layers for entry in layer]
    return sorted(merged, key=lambda e: (e.score, e.layer, e.rank))


def hybrid_sparsity(stats, pruned_ranks, nm):
    # type: (Sequence[LayerStats], Sequence[int], NmConfig) -> float
    """Global sparsity ``1 - sum_l (w_l/W) (K'_l/K_l) (N/M)`` for given pruned-rank counts.

    Layers are weighted by their real element counts, ``K'/K`` is taken on
    the padded block grid.
    """
    total = sum(s.size for s in stats)
    if total == 0:
        return 1.0
    density = 0.0
    for s, count in zip(stats, pruned_ranks):
        density += (s.size / total) * ((s.block_cols - count) / s.block_cols) * nm.density
    return 1.0 - density


def select_prune_set(ranked, model_stats, kappa_p, nm, already_pruned=None, kept_weights=None):
    # type: (Sequence[RankColumnScore], Sequence[LayerStats], float, NmConfig, Optional[Sequence[int]], Optional[Sequence[int]]) -> List[int]
    """Pruned-rank count per layer reaching global sparsity ``kappa_p``.

    Walks ``ranked`` from the cheapest entry, pruning one rank column at a
    time. Counts start from ``already_pruned`` since pruned blocks stay
    pruned. A layer's last remaining rank column is never pruned.

    Sparsity follows :func:`hybrid_sparsity` unless ``kept_weights`` gives
    each layer's count of kept real weights; then every newly pruned entry
    subtracts its ``weights_removed_if_pruned``, which is exact on layers
    padded up to the block grid.

    Raises:
        ScheduleError: ``kappa_p`` cannot be met; ``layers`` names the layers
            held back by the collapse guard.
    """
    if kappa_p < nm.min_sparsity - SPARSITY_TOL:
        raise ArgumentError('Target sparsity {:.4f} is below the {} floor {:.4f}.'.format(
            kappa_p, nm, nm.min_sparsity))
    counts = [0] * len(model_stats) if already_pruned is None else [int(c) for c in already_pruned]
    if len(counts) != len(model_stats):
        raise ArgumentError('Got {} pruned counts for {} layers.'.format(len(counts), len(model_stats)))

    if kept_weights is None:
        def sparsity():
            return hybrid_sparsity(model_stats, counts, nm)
    else:
        if len(kept_weights) != len(model_stats):
            raise ArgumentError('Got {} kept counts for {} layers.'.format(len(kept_weights), len(model_stats)))
        total = sum(s.size for s in model_stats)
        kept = [int(k) for k in kept_weights]

        def sparsity():
            return 1.0 - sum(kept) / total if total else 1.0

    if sparsity() >= kappa_p - SPARSITY_TOL:
        return counts

    guarded = set()
    for entry in ranked:
        layer = entry.layer
        if entry.rank < counts[layer]:
            continue
        if counts[layer] + 1 >= model_stats[layer].block_cols:
            if layer not in guarded:
                _logger.warning('Layer {} keeps its last block column.'.format(layer))
            guarded.add(layer)
            continue
        counts[layer] += 1
        if kept_weights is not None:
            kept[layer] -= entry.weights_removed_if_pruned
        if sparsity() >= kappa_p - SPARSITY_TOL:
            return counts

    raise ScheduleError('Sparsity {:.4f} is unreachable: layers {} are down to one block column.'.format(
        kappa_p, sorted(guarded)), tuple(sorted(guarded)))


def apply_block_prune(mask, grid, count):
    # type: (np.ndarray, BlockScoreGrid, int) -> np.ndarray
    """Clear the blocks at sorted ranks ``[0, count)`` of every block row."""
    mask = as_mask(mask)
    block_cols = grid.scores.shape[1]
    if not 0 <= count < max(block_cols, 1):
        raise ArgumentError('Cannot prune {} of {} rank columns.'.format(count, block_cols))
    if count == 0:
        return mask.copy()
    keep = np.ones(grid.scores.shape, dtype=bool)
    np.put_along_axis(keep, grid.row_perms[:, :count], False, axis=1)
    return mask & expand_blocks(keep, grid.b)
