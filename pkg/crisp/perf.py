#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
crisp/perf.py was created on 2024/05/06.
file in :relativeFile

Roofline cost model of a sparse tensor-core accelerator: cycles are the
larger of compute (effectual MACs over MAC lanes) and memory (bytes moved
over bandwidth), energy charges every MAC and every byte moved.
"""
import enum
import math
from multiprocessing.pool import ThreadPool
from typing import Any
from typing import Dict
from typing import List
from typing import NamedTuple
from typing import Sequence

import pandas as pd

from crisp.basic import DEFAULT_BLOCK_SIZES, ArgumentError, ConfigError, NmConfig, get_approp_n_jobs, parse_nm
from crisp.depens import logging
from crisp.sparse.metadata import metadata_bits_crisp, metadata_bits_csr

_logger = logging.get_logger(__name__)

DSTC_ACTIVATION_SPARSITY = 0.4

SWEEP_COLUMNS = ['layer', 'mode', 'nm', 'b', 'block_sparsity', 'k_prime', 'sparsity', 'macs',
                 'metadata_bits', 'memory_level', 'compute_cycles', 'memory_cycles', 'total_cycles',
                 'traffic_bytes', 'energy_uj', 'speedup', 'energy_ratio']


class ExecutionMode(enum.Enum):
    """How a layer is executed.

    Attributes:
        DENSE:
            Every MAC, no metadata.
        CRISP:
            Kept blocks only, N:M inside them.
        STC_2_4:
            2:4 over the whole row, no block skipping.
        DSTC:
            Unstructured weights at the same density with CSR indices and
            sparse activations; activations still move densely.
    """

    DENSE = 0
    CRISP = 1
    STC_2_4 = 2
    DSTC = 3


class _HwConfig(NamedTuple):
    mac_lanes: int
    smem_bytes: int
    smem_bandwidth: float
    smem_bandwidth_fraction: float
    dram_bandwidth: float
    value_bytes: int
    energy_per_mac: float
    energy_per_smem_byte: float
    energy_per_dram_byte: float


class HwConfig(_HwConfig):
    """Accelerator parameters. Bandwidths in bytes/cycle, energies in pJ.

    The defaults model four tensor cores of 64 MACs sharing 256 KiB of SMEM,
    of which a quarter of the bandwidth is given to the sparse pipeline.
    """

    def __new__(cls, mac_lanes=256, smem_bytes=262144, smem_bandwidth=256.0, smem_bandwidth_fraction=0.25,
                dram_bandwidth=64.0, value_bytes=1, energy_per_mac=1.0, energy_per_smem_byte=2.0,
                energy_per_dram_byte=50.0):
        values = (mac_lanes, smem_bytes, smem_bandwidth, smem_bandwidth_fraction, dram_bandwidth, value_bytes,
                  energy_per_mac, energy_per_smem_byte, energy_per_dram_byte)
        for name, value in zip(cls._fields, values):
            if not value > 0:
                raise ArgumentError('HwConfig.{} must be positive, got {}.'.format(name, value))
        if smem_bandwidth_fraction > 1:
            raise ArgumentError('smem_bandwidth_fraction must be <= 1, got {}.'.format(smem_bandwidth_fraction))
        return super(HwConfig, cls).__new__(cls, *values)

    @classmethod
    def from_dict(cls, d):
        # type: (Dict[str, Any]) -> HwConfig
        unknown = set(d) - set(cls._fields)
        if unknown:
            raise ConfigError('Unknown hardware keys: {}.'.format(', '.join(sorted(unknown))))
        return cls(**d)

    @property
    def effective_smem_bandwidth(self):
        # type: () -> float
        return self.smem_bandwidth * self.smem_bandwidth_fraction


class LayerShape(NamedTuple):
    """A layer as a GEMM: ``batch`` rows of activations (output pixels times
    images) against an S x K weight matrix."""
    name: str
    batch: int
    s: int
    k: int


class PerfEstimate(NamedTuple):
    macs: int
    metadata_bits: float
    memory_level: str
    compute_cycles: int
    memory_cycles: int
    total_cycles: int
    traffic_bytes: int
    energy_uj: float
    speedup_vs_dense: float


# 3x3 convs of every stage and a bottleneck 1x1, one 224x224 image.
RESNET50_LAYERS = (
    LayerShape('conv2_3x3', 56 * 56, 64, 64 * 9),
    LayerShape('conv3_3x3', 28 * 28, 128, 128 * 9),
    LayerShape('conv4_3x3', 14 * 14, 256, 256 * 9),
    LayerShape('conv4_1x1', 14 * 14, 1024, 256),
    LayerShape('conv5_3x3', 7 * 7, 512, 512 * 9),
)


def _ceil_div(a, b):
    return int(-(-a // b))


def k_prime_for(k, b, block_sparsity):
    # type: (int, int, float) -> int
    """Kept columns after pruning ``block_sparsity`` of the block columns (at least one kept)."""
    if not 0 <= block_sparsity < 1:
        raise ArgumentError('block_sparsity must lie in [0, 1), got {}.'.format(block_sparsity))
    block_cols = _ceil_div(k, b)
    return b * max(1, min(block_cols, int(round((1 - block_sparsity) * block_cols))))


def _raw_estimate(batch, s, k, k_prime, nm, b, hw, mode, activation_sparsity):
    vb = hw.value_bytes
    k_pad = _ceil_div(k, b) * b
    block_rows = _ceil_div(s, b)

    if mode is ExecutionMode.DENSE:
        macs = batch * s * k
        weight_values, metadata_bits, act_cols = s * k, 0, k_pad
    elif mode is ExecutionMode.CRISP:
        macs = batch * s * k_prime * nm.n // nm.m
        weight_values = s * k_prime * nm.n // nm.m
        block_bits, nm_bits = metadata_bits_crisp(s, k_prime, b, nm)
        # an m:m group keeps every position, its offsets carry nothing
        metadata_bits = block_bits if nm.n == nm.m else block_bits + nm_bits
        act_cols = k_prime
    elif mode is ExecutionMode.STC_2_4:
        two_four = NmConfig(2, 4)
        macs = batch * s * k_pad // 2
        weight_values = s * k_pad // 2
        metadata_bits = metadata_bits_crisp(s, k_pad, b, two_four)[1]
        act_cols = k_pad
    elif mode is ExecutionMode.DSTC:
        density = (k_prime / k_pad) * nm.density
        weight_values = int(round(s * k * density))
        macs = int(round(batch * weight_values * (1 - activation_sparsity)))
        metadata_bits = metadata_bits_csr(s, k, weight_values)
        act_cols = k_pad
    else:
        raise ArgumentError('Unknown execution mode {!r}.'.format(mode))

    weight_bytes = weight_values * vb + _ceil_div(metadata_bits, 8)
    traffic = weight_bytes + block_rows * batch * act_cols * vb + batch * s * vb
    footprint = weight_bytes + batch * k * vb + batch * s * vb
    if footprint <= hw.smem_bytes:
        level, bandwidth, energy_per_byte = 'smem', hw.effective_smem_bandwidth, hw.energy_per_smem_byte
    else:
        level, bandwidth, energy_per_byte = 'dram', hw.dram_bandwidth, hw.energy_per_dram_byte

    compute_cycles = _ceil_div(macs, hw.mac_lanes)
    memory_cycles = int(math.ceil(traffic / bandwidth))
    energy = (macs * hw.energy_per_mac + traffic * energy_per_byte) * 1e-6
    return PerfEstimate(macs, metadata_bits, level, compute_cycles, memory_cycles,
                        max(compute_cycles, memory_cycles), traffic, energy, 1.0)


def estimate(batch, s, k, k_prime, nm, b, hw=None, mode=ExecutionMode.CRISP,
             activation_sparsity=DSTC_ACTIVATION_SPARSITY):
    # type: (int, int, int, int, Any, int, HwConfig, ExecutionMode, float) -> PerfEstimate
    """Cycles, traffic and energy of one layer.

    Args:
        batch, s, k:
            GEMM shape: ``batch`` activation rows, S x K weights.
        k_prime:
            Kept columns per block row (multiple of ``b``); ignored by
            DENSE and STC_2_4.
        nm:
            N:M ratio inside kept blocks.
        b:
            Block edge; also the number of output rows sharing one
            activation tile.
        hw:
            :class:`HwConfig`, defaults when ``None``.
        mode:
            :class:`ExecutionMode`.
        activation_sparsity:
            Fraction of zero activations DSTC skips.

    Returns:
        :class:`PerfEstimate` whose ``speedup_vs_dense`` is the DENSE total
        over this total.
    """
    hw = hw or HwConfig()
    nm = parse_nm(nm)
    if min(batch, s, k, b) < 1:
        raise ArgumentError('batch, s, k and b must be >= 1.')
    if not 0 <= k_prime <= _ceil_div(k, b) * b or k_prime % b:
        raise ArgumentError("K'={} must be a multiple of b={} within the padded K.".format(k_prime, b))
    result = _raw_estimate(batch, s, k, k_prime, nm, b, hw, mode, activation_sparsity)
    if mode is ExecutionMode.DENSE:
        return result
    dense = _raw_estimate(batch, s, k, k, nm, b, hw, ExecutionMode.DENSE, activation_sparsity)
    return result._replace(speedup_vs_dense=dense.total_cycles / result.total_cycles)


def _row(layer, mode, nm, b, block_sparsity, hw):
    k_prime = k_prime_for(layer.k, b, block_sparsity)
    est = estimate(layer.batch, layer.s, layer.k, k_prime, nm, b, hw, mode)
    dense = estimate(layer.batch, layer.s, layer.k, k_prime, nm, b, hw, ExecutionMode.DENSE)
    if mode is ExecutionMode.DENSE:
        sparsity = 0.0
    elif mode is ExecutionMode.STC_2_4:
        sparsity = 0.5
    else:
        sparsity = 1.0 - (k_prime / (_ceil_div(layer.k, b) * b)) * nm.density
    return {
        'layer': layer.name, 'mode': mode.name, 'nm': str(nm), 'b': b, 'block_sparsity': block_sparsity,
        'k_prime': k_prime, 'sparsity': sparsity, 'macs': est.macs, 'metadata_bits': est.metadata_bits,
        'memory_level': est.memory_level, 'compute_cycles': est.compute_cycles,
        'memory_cycles': est.memory_cycles, 'total_cycles': est.total_cycles,
        'traffic_bytes': est.traffic_bytes, 'energy_uj': est.energy_uj, 'speedup': est.speedup_vs_dense,
        'energy_ratio': dense.energy_uj / est.energy_uj,
    }


def sweep(layers, nms=('1:4', '2:4', '3:4'), blocks=DEFAULT_BLOCK_SIZES, block_sparsities=(0.5, 0.6, 0.7),
          hw=None, modes=(ExecutionMode.CRISP,), n_jobs=1):
    # type: (Sequence[LayerShape], Sequence[Any], Sequence[int], Sequence[float], HwConfig, Sequence[ExecutionMode], int) -> pd.DataFrame
    """Estimate every (layer, mode, nm, b, block sparsity) point.

    Rows come out in that nesting order whatever ``n_jobs`` is.
    """
    hw = hw or HwConfig()
    points = [(layer, mode, parse_nm(nm), b, bs)
              for layer in layers for mode in modes for nm in nms for b in blocks for bs in block_sparsities]
    n_jobs = get_approp_n_jobs(n_jobs) if n_jobs != 1 else 1
    if n_jobs == 1:
        rows = [_row(*p, hw=hw) for p in points]
    else:
        with ThreadPool(n_jobs) as pool:
            rows = pool.map(lambda p: _row(*p, hw=hw), points)
    _logger.debug('Estimated {} sweep points.'.format(len(rows)))
    return pd.DataFrame(rows, columns=SWEEP_COLUMNS)


def model_layers(model, batch=1):
    # type: (Any, int) -> List[LayerShape]
    """:class:`LayerShape` of every layer of a fitted :class:`~crisp.micronet.model.MicroModel`."""
    return [LayerShape('fc{}'.format(i), batch, s, k) for i, (s, k) in
            enumerate(layer.shape for layer in model.layers_)]
