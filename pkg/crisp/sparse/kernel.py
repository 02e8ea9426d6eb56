#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
crisp/sparse/kernel.py was created on 2024/04/08.
file in :relativeFile

Functional SpMM over :class:`~crisp.sparse.hybrid.HybridSparseMatrix`.

Every output row walks its kept blocks in index order, the groups of each
block in order and the N offsets of each group in order, gathering the
named activation and accumulating the product. That visiting order is the
ascending column order, so the result matches
``matmul_dense(acts, decode(h))`` bit for bit.
"""
from multiprocessing.pool import ThreadPool

import numpy as np

from crisp.basic import DimensionError, get_approp_n_jobs
from crisp.core.tensor import as_dense
from crisp.depens import logging
from crisp.sparse.hybrid import HybridSparseMatrix, check_well_formed

_logger = logging.get_logger(__name__)


class KernelStats(object):
    """Counters filled in by :func:`spmm` when passed as ``stats``."""

    def __init__(self):
        self.macs = 0
        self.weight_reads = 0
        self.outputs = 0

    @property
    def reads_per_output(self):
        # type: () -> float
        return self.weight_reads / self.outputs if self.outputs else 0.0


def row_streams(h):
    """Per output row, the activation columns and weights in visiting order.

    Returns:
        ``(cols, vals)``, both ``S x L`` with ``L = K' * N / M``.
    """
    check_well_formed(h)
    nm, b = h.nm, h.b
    block_rows, kc, groups = h.block_rows, h.kept_cols_per_blockrow, b // nm.m
    shape = (block_rows, kc, b, groups, nm.n)

    offsets = h.offsets.reshape(shape).astype(np.int64)
    cols = (h.block_col_indices[:, :, None, None, None] * b
            + np.arange(groups)[None, None, None, :, None] * nm.m
            + offsets)
    vals = h.values.reshape(shape)

    length = kc * groups * nm.n
    cols = cols.transpose(0, 2, 1, 3, 4).reshape(h.orig_rows, length)
    vals = vals.transpose(0, 2, 1, 3, 4).reshape(h.orig_rows, length)
    return cols, vals


def _spmm_rows(acts, cols, vals):
    """Output columns of ``cols``'s rows and the number of weight values read."""
    out = np.zeros((acts.shape[0], cols.shape[0]), dtype=np.float64)
    reads = 0
    for step in range(cols.shape[1]):
        weights = vals[None, :, step]
        reads += acts.shape[0] * weights.size
        out += acts[:, cols[:, step]] * weights
    return out, reads


def spmm(h, acts, n_jobs=1, stats=None):
    # type: (HybridSparseMatrix, np.ndarray, int, KernelStats) -> np.ndarray
    """Compute ``acts @ decode(h).T`` straight from the compressed form.

    Args:
        h:
            Compressed S x K weights.
        acts:
            Activations, batch x K (K is the padded width).
        n_jobs:
            Worker threads over output-row chunks, ``-1`` for all cores.
            Every output keeps its own accumulation order, so the result
            does not depend on this value.
        stats:
            Optional :class:`KernelStats` to count MACs and weight reads.

    Returns:
        batch x S output.
    """
    acts = as_dense(acts, 'activations')
    if acts.shape[1] != h.orig_cols:
        raise DimensionError('Activations have K={}, weights expect K={}.'.format(
            acts.shape[1], h.orig_cols))
    cols, vals = row_streams(h)

    n_jobs = get_approp_n_jobs(n_jobs) if n_jobs != 1 else 1
    if n_jobs == 1 or h.orig_rows < 2:
        out, reads = _spmm_rows(acts, cols, vals)
    else:
        chunks = [c for c in np.array_split(np.arange(h.orig_rows), n_jobs) if c.size]
        _logger.debug('spmm over {} row chunks.'.format(len(chunks)))
        with ThreadPool(len(chunks)) as pool:
            parts = pool.map(lambda rows: _spmm_rows(acts, cols[rows], vals[rows]), chunks)
        out = np.concatenate([part for part, _ in parts], axis=1)
        reads = sum(r for _, r in parts)

    if stats is not None:
        stats.macs += reads
        stats.weight_reads += reads
        stats.outputs += acts.shape[0] * h.orig_rows
    return out


def effectual_mac_count(h, batch):
    # type: (HybridSparseMatrix, int) -> int
    """``batch * S * K' * N / M``."""
    return batch * h.orig_rows * h.k_prime * h.nm.n // h.nm.m
