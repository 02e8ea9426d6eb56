#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
crisp/sparse/serialize.py was created on 2024/03/27.
file in :relativeFile

Byte layout of a ``.crsp`` file, little-endian::

    magic "CRSP" | version u32 | orig_rows u32 | orig_cols u32 | b u16 | n u8 | m u8
    | kept_cols_per_blockrow u32 | block_col_indices u16[] | offsets u8[] | values f8[]
"""
import numpy as np

from crisp.basic import NmConfig, FORMAT_VERSION, FormatError, CorruptionError, ArgumentError
from crisp.sparse.hybrid import HybridSparseMatrix, check_well_formed

MAGIC = b'CRSP'

HEADER_DTYPE = np.dtype([
    ('magic', 'S4'),
    ('version', '<u4'),
    ('orig_rows', '<u4'),
    ('orig_cols', '<u4'),
    ('b', '<u2'),
    ('n', 'u1'),
    ('m', 'u1'),
    ('kept_cols_per_blockrow', '<u4'),
])
HEADER_SIZE = HEADER_DTYPE.itemsize

_U16_MAX = np.iinfo(np.uint16).max
_U32_MAX = np.iinfo(np.uint32).max


def serialize(h):
    # type: (HybridSparseMatrix) -> bytes
    check_well_formed(h)
    if max(h.orig_rows, h.orig_cols, h.kept_cols_per_blockrow) > _U32_MAX:
        raise ArgumentError('Matrix {}x{} is too large for the u32 header.'.format(h.orig_rows, h.orig_cols))
    if h.b > _U16_MAX or h.block_cols > _U16_MAX + 1:
        raise ArgumentError('Block grid b={} with {} block columns does not fit u16 indices.'.format(
            h.b, h.block_cols))
    header = np.array([(MAGIC, FORMAT_VERSION, h.orig_rows, h.orig_cols, h.b, h.nm.n, h.nm.m,
                        h.kept_cols_per_blockrow)], dtype=HEADER_DTYPE)
    return b''.join([
        header.tobytes(),
        np.asarray(h.block_col_indices).astype('<u2').tobytes(),
        np.asarray(h.offsets).astype('u1').tobytes(),
        np.asarray(h.values).astype('<f8').tobytes(),
    ])


def read_header(data):
    # type: (bytes) -> dict
    """Decode and check the fixed-size header of a ``.crsp`` stream."""
    if len(data) < HEADER_SIZE:
        raise FormatError('Truncated header: {} of {} bytes.'.format(len(data), HEADER_SIZE))
    header = np.frombuffer(data, dtype=HEADER_DTYPE, count=1)[0]
    if bytes(header['magic']) != MAGIC:
        raise FormatError('Bad magic {!r}, expected {!r}.'.format(bytes(header['magic']), MAGIC))
    if int(header['version']) != FORMAT_VERSION:
        raise FormatError('Unsupported format version {}, expected {}.'.format(
            int(header['version']), FORMAT_VERSION))
    return {name: int(header[name]) for name in HEADER_DTYPE.names if name != 'magic'}


def _payload_sizes(header):
    rows, b, kc = header['orig_rows'], header['b'], header['kept_cols_per_blockrow']
    n, m = header['n'], header['m']
    try:
        NmConfig(n, m)
    except ArgumentError as e:
        raise CorruptionError(str(e))
    if b == 0 or b % m:
        raise CorruptionError('Block size {} is not a multiple of m={}.'.format(b, m))
    n_indices = (rows // b) * kc
    n_values = rows * kc * b * n // m
    return n_indices, n_values


def deserialize(data):
    # type: (bytes) -> HybridSparseMatrix
    data = bytes(data)
    header = read_header(data)
    n_indices, n_values = _payload_sizes(header)

    expected = HEADER_SIZE + 2 * n_indices + n_values + 8 * n_values
    if len(data) < expected:
        raise FormatError('Truncated payload: {} of {} bytes.'.format(len(data), expected))
    if len(data) > expected:
        raise FormatError('{} trailing bytes after payload.'.format(len(data) - expected))

    pos = HEADER_SIZE
    indices = np.frombuffer(data, dtype='<u2', count=n_indices, offset=pos).astype(np.int64)
    pos += 2 * n_indices
    offsets = np.frombuffer(data, dtype='u1', count=n_values, offset=pos).astype(np.uint8)
    pos += n_values
    values = np.frombuffer(data, dtype='<f8', count=n_values, offset=pos).astype(np.float64)

    b, kc = header['b'], header['kept_cols_per_blockrow']
    h = HybridSparseMatrix(
        orig_rows=header['orig_rows'], orig_cols=header['orig_cols'],
        nm=NmConfig(header['n'], header['m']), b=b, kept_cols_per_blockrow=kc,
        block_col_indices=indices.reshape(header['orig_rows'] // b, kc),
        offsets=offsets, values=values)
    check_well_formed(h)
    return h


def write_crsp(path, h):
    # type: (str, HybridSparseMatrix) -> None
    data = serialize(h)
    with open(path, 'wb') as f:
        f.write(data)


def read_crsp(path):
    # type: (str) -> HybridSparseMatrix
    with open(path, 'rb') as f:
        return deserialize(f.read())
