#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
crisp/sparse/metadata.py was created on 2024/03/26.
file in :relativeFile

Index storage cost of the hybrid format against CSR and ELLPACK, in bits.
"""
import numpy as np
from scipy import sparse

from crisp.basic import MetadataReport, ArgumentError, DimensionError, parse_nm


def floor_log2(x):
    # type: (int) -> int
    """``⌊log2 x⌋`` for ``x >= 1``."""
    return int(x).bit_length() - 1


def ceil_log2(x):
    # type: (int) -> int
    """``⌈log2 x⌉`` for ``x >= 1``; 0 for ``x == 1``."""
    return (int(x) - 1).bit_length()


def _ceil_div(a, b):
    return -(-a // b)


def overall_sparsity(k, k_prime, nm):
    # type: (int, int, object) -> float
    """``1 - (K'/K)(N/M)``."""
    nm = parse_nm(nm)
    if not 0 <= k_prime <= k:
        raise ArgumentError("Kept columns K'={} must lie in [0, K={}].".format(k_prime, k))
    if k == 0:
        return 1.0
    return 1.0 - (k_prime / k) * (nm.n / nm.m)


def flops_ratio(k, k_prime, nm):
    # type: (int, int, object) -> float
    """Pruned over dense FLOPs of one layer."""
    return 1.0 - overall_sparsity(k, k_prime, nm)


def metadata_bits_crisp(s, k_prime, b, nm):
    """Block-index and N:M-offset bits of an S x K layer keeping ``k_prime`` columns.

    ``block_bits = S*K'*⌊log2(K'/B)⌋ / (B*B)`` and
    ``nm_bits = S*K'*(N/M)*⌊log2 M⌋``. ``block_bits`` is an int when the
    division is exact, a float otherwise.

    Returns:
        ``(block_bits, nm_bits)``
    """
    nm = parse_nm(nm)
    if k_prime == 0:
        return 0, 0
    if k_prime < 0 or k_prime % b:
        raise DimensionError("K'={} is not a positive multiple of b={}.".format(k_prime, b))
    numerator = s * k_prime * floor_log2(k_prime // b)
    block_bits = numerator // (b * b) if numerator % (b * b) == 0 else numerator / (b * b)
    nm_bits = s * (k_prime // nm.m) * nm.n * floor_log2(nm.m)
    return block_bits, nm_bits


def metadata_bits_addressable(s, k, k_prime, b):
    # type: (int, int, int, int) -> int
    """Block-index bits when every index can address all ``K/B`` block columns."""
    if k_prime == 0:
        return 0
    return _ceil_div(s, b) * (k_prime // b) * ceil_log2(_ceil_div(k, b))


def metadata_bits_csr(s, k, nnz):
    # type: (int, int, int) -> int
    """``nnz*⌈log2 K⌉ + (S+1)*⌈log2(nnz+1)⌉`` (at least one bit per row pointer)."""
    if not 0 <= nnz <= s * k:
        raise ArgumentError('nnz={} out of range for a {}x{} matrix.'.format(nnz, s, k))
    return nnz * ceil_log2(max(k, 1)) + (s + 1) * max(1, ceil_log2(nnz + 1))


def metadata_bits_ellpack(s, k, max_nnz_per_row):
    # type: (int, int, int) -> int
    if not 0 <= max_nnz_per_row <= k:
        raise ArgumentError('max_nnz_per_row={} out of range for K={}.'.format(max_nnz_per_row, k))
    return s * max_nnz_per_row * ceil_log2(max(k, 1))


def sparse_format_bits(mask):
    """CSR and ELLPACK index bits of an arbitrary mask.

    Returns:
        ``(csr_bits, ellpack_bits)``
    """
    csr = sparse.csr_matrix(np.asarray(mask, dtype=bool))
    s, k = csr.shape
    row_nnz = np.diff(csr.indptr)
    max_row = int(row_nnz.max()) if row_nnz.size else 0
    return metadata_bits_csr(s, k, int(csr.nnz)), metadata_bits_ellpack(s, k, max_row)


def unstructured_mask(s, k, nnz, seed=0, weights=None):
    """Global magnitude mask keeping the ``nnz`` largest entries.

    Random Gaussian magnitudes stand in when ``weights`` is not given.
    """
    if weights is None:
        rng = np.random.RandomState(seed)
        magnitude = np.abs(rng.standard_normal((s, k)))
    else:
        magnitude = np.abs(np.asarray(weights, dtype=np.float64))
    order = np.argsort(-magnitude, axis=None, kind='stable')
    mask = np.zeros(s * k, dtype=bool)
    mask[order[:nnz]] = True
    return mask.reshape(s, k)


def metadata_report(s, k, k_prime, nm, b, seed=0, weights=None):
    # type: (int, int, int, object, int, int, np.ndarray) -> MetadataReport
    """Compare the hybrid layout with CSR and ELLPACK at the same density.

    CSR and ELLPACK store an unstructured mask with the same number of
    nonzeros (``S*K'*N/M``). Its uneven rows are what forces ELLPACK padding.
    """
    nm = parse_nm(nm)
    block_bits, nm_bits = metadata_bits_crisp(s, k_prime, b, nm)
    nnz = s * k_prime * nm.n // nm.m
    csr_bits, ellpack_bits = sparse_format_bits(unstructured_mask(s, k, nnz, seed, weights))
    return MetadataReport(
        crisp_block_bits=block_bits,
        crisp_nm_bits=nm_bits,
        crisp_total_bits=block_bits + nm_bits,
        crisp_block_bits_addressable=metadata_bits_addressable(s, k, k_prime, b),
        csr_bits=csr_bits,
        ellpack_bits=ellpack_bits,
        overall_sparsity=overall_sparsity(k, k_prime, nm))
