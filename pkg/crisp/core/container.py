#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
core/container.py was created on 2024/04/02.
file in :relativeFile

Versioned binary container for dataset and model checkpoints::

    magic (4 bytes) | version u32 | header length u32 | JSON header | raw arrays

The JSON header (sorted keys) carries free-form ``meta`` and, for every array
in storage order, its name, little-endian dtype string and shape.
"""
import json

import numpy as np

from crisp.basic import FORMAT_VERSION, FormatError

from typing import Any  # NOQA
from typing import Dict  # NOQA
from typing import List  # NOQA
from typing import Tuple  # NOQA

KIND_MAGIC = {
    'dataset': b'CRDS',
    'model': b'CRMD',
}

_PREFIX_DTYPE = np.dtype([('magic', 'S4'), ('version', '<u4'), ('header_len', '<u4')])


def _le(dtype):
    dtype = np.dtype(dtype)
    return dtype.newbyteorder('<') if dtype.byteorder == '>' else dtype


def dumps(kind, arrays, meta=None):
    # type: (str, List[Tuple[str, np.ndarray]], Dict[str, Any]) -> bytes
    """Pack named arrays and a JSON-able ``meta`` dict into bytes."""
    magic = KIND_MAGIC[kind]
    specs, chunks = [], []
    for name, arr in arrays:
        arr = np.ascontiguousarray(arr)
        arr = arr.astype(_le(arr.dtype), copy=False)
        specs.append({'name': name, 'dtype': arr.dtype.str, 'shape': list(arr.shape)})
        chunks.append(arr.tobytes())
    header = json.dumps({'arrays': specs, 'meta': meta or {}}, sort_keys=True).encode('utf-8')
    prefix = np.array([(magic, FORMAT_VERSION, len(header))], dtype=_PREFIX_DTYPE).tobytes()
    return b''.join([prefix, header] + chunks)


def loads(kind, data):
    # type: (str, bytes) -> Tuple[Dict[str, np.ndarray], Dict[str, Any]]
    """Inverse of :func:`dumps`; returns ``(arrays, meta)``."""
    data = bytes(data)
    magic = KIND_MAGIC[kind]
    if len(data) < _PREFIX_DTYPE.itemsize:
        raise FormatError('Truncated {} file header.'.format(kind))
    prefix = np.frombuffer(data, dtype=_PREFIX_DTYPE, count=1)[0]
    if bytes(prefix['magic']) != magic:
        raise FormatError('Not a {} file: magic {!r}.'.format(kind, bytes(prefix['magic'])))
    if int(prefix['version']) != FORMAT_VERSION:
        raise FormatError('Unsupported {} file version {}.'.format(kind, int(prefix['version'])))

    pos = _PREFIX_DTYPE.itemsize
    end = pos + int(prefix['header_len'])
    if len(data) < end:
        raise FormatError('Truncated {} file header.'.format(kind))
    try:
        header = json.loads(data[pos:end].decode('utf-8'))
    except ValueError:
        raise FormatError('Unreadable {} file header.'.format(kind))

    pos = end
    arrays = {}
    for entry in header['arrays']:
        dtype = np.dtype(entry['dtype'])
        count = int(np.prod(entry['shape'], dtype=np.int64))
        nbytes = count * dtype.itemsize
        if len(data) < pos + nbytes:
            raise FormatError('Truncated array {!r} in {} file.'.format(entry['name'], kind))
        arr = np.frombuffer(data, dtype=dtype, count=count, offset=pos)
        arrays[entry['name']] = arr.astype(dtype.newbyteorder('='), copy=True).reshape(entry['shape'])
        pos += nbytes
    if pos != len(data):
        raise FormatError('{} trailing bytes in {} file.'.format(len(data) - pos, kind))
    return arrays, header['meta']


def save(path, kind, arrays, meta=None):
    # type: (str, str, List[Tuple[str, np.ndarray]], Dict[str, Any]) -> None
    with open(path, 'wb') as f:
        f.write(dumps(kind, arrays, meta))


def load(path, kind):
    # type: (str, str) -> Tuple[Dict[str, np.ndarray], Dict[str, Any]]
    with open(path, 'rb') as f:
        return loads(kind, f.read())
