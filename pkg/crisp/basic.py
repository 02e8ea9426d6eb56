#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
crisp/basic.py was created on 2024/03/18.
file in :relativeFile
"""
from typing import Any
from typing import Dict
from typing import List
from typing import NamedTuple
from typing import Optional
from typing import Tuple
import enum
import multiprocessing

DEFAULT_BLOCK_SIZES = (16, 32, 64)
FORMAT_VERSION = 1


class CrispError(Exception):
    """Base class of every error raised on purpose by crisp."""


class DimensionError(CrispError, ValueError):
    pass


class ArgumentError(CrispError, ValueError):
    pass


class PatternError(CrispError, ValueError):
    """A mask does not follow the hybrid N:M + block pattern.

    Attributes:
        report:
            The :class:`ValidationReport` listing every violation.
    """

    def __init__(self, message, report=None):
        # type: (str, Optional[ValidationReport]) -> None
        super(PatternError, self).__init__(message)
        self.report = report


class CorruptionError(CrispError, ValueError):
    pass


class FormatError(CrispError, ValueError):
    pass


class ScheduleError(CrispError, ValueError):
    """The sparsity schedule cannot be met.

    Attributes:
        layers:
            Ids of the layers that bind the schedule (collapse guard reached).
    """

    def __init__(self, message, layers=()):
        # type: (str, Tuple[int, ...]) -> None
        super(ScheduleError, self).__init__(message)
        self.layers = tuple(layers)


class DivergenceError(CrispError, ArithmeticError):
    pass


class InvariantError(CrispError, AssertionError):
    pass


class ConfigError(CrispError, ValueError):
    pass


class _NmConfig(NamedTuple):
    n: int
    m: int


class NmConfig(_NmConfig):
    """Fine-grained N:M ratio: ``n`` kept weights in every aligned group of ``m``."""

    def __new__(cls, n, m):
        # type: (int, int) -> NmConfig
        n, m = int(n), int(m)
        if m < 2:
            raise ArgumentError('N:M group size must be >= 2, got m={}.'.format(m))
        if not 1 <= n <= m:
            raise ArgumentError('N:M requires 1 <= n <= m, got {}:{}.'.format(n, m))
        return super(NmConfig, cls).__new__(cls, n, m)

    @property
    def density(self):
        # type: () -> float
        return self.n / self.m

    @property
    def min_sparsity(self):
        # type: () -> float
        return 1.0 - self.n / self.m

    def __str__(self):
        return '{}:{}'.format(self.n, self.m)


def parse_nm(text):
    # type: (Any) -> NmConfig
    """Parse ``"2:4"``, a ``(2, 4)`` pair or an :class:`NmConfig`."""
    if isinstance(text, NmConfig):
        return text
    if isinstance(text, str):
        parts = text.split(':')
        if len(parts) != 2:
            raise ArgumentError('N:M must look like "2:4", got {!r}.'.format(text))
        try:
            return NmConfig(int(parts[0]), int(parts[1]))
        except ValueError as e:
            if isinstance(e, CrispError):
                raise
            raise ArgumentError('N:M must look like "2:4", got {!r}.'.format(text))
    n, m = text
    return NmConfig(n, m)


def check_block(b, nm):
    # type: (int, NmConfig) -> int
    """Return ``b`` if it is a legal block edge for ``nm``."""
    b = int(b)
    if b < nm.m or b % nm.m != 0:
        raise ArgumentError(
            'Block size {} must be a positive multiple of m={}.'.format(b, nm.m))
    return b


class ConvShape(NamedTuple):
    """Convolution kernel shape: height, width, input and output channels."""
    h: int
    w: int
    r: int
    s: int


class Padding(NamedTuple):
    orig_rows: int
    orig_cols: int
    pad_rows: int
    pad_cols: int


class Violation(NamedTuple):
    """One broken rule of the hybrid pattern.

    Attributes:
        kind:
            ``'uneven_block_rows'`` or ``'group_overflow'``.
        coords:
            ``(block_row, block_col)`` of an extra or missing block for the
            first kind, ``(row, group)``
            for the second (group counted over the full row).
        detail:
            Human readable description.
    """
    kind: str
    coords: Tuple[int, int]
    detail: str


class ValidationReport(NamedTuple):
    ok: bool
    violations: List[Violation]

    def summary(self, limit=5):
        # type: (int) -> str
        if self.ok:
            return 'pattern ok'
        shown = '; '.join(v.detail for v in self.violations[:limit])
        more = len(self.violations) - limit
        if more > 0:
            shown += '; ... ({} more)'.format(more)
        return shown


class MetadataReport(NamedTuple):
    """Metadata cost of one layer in bits, CRISP against CSR and ELLPACK."""
    crisp_block_bits: float
    crisp_nm_bits: int
    crisp_total_bits: float
    crisp_block_bits_addressable: int
    csr_bits: int
    ellpack_bits: int
    overall_sparsity: float


class RankColumnScore(NamedTuple):
    """Score ``c_o`` of rank column ``o`` of one layer.

    Pruning it removes one block from every block row, i.e.
    ``weights_removed_if_pruned`` elements.
    """
    layer: int
    rank: int
    score: float
    weights_removed_if_pruned: int


class LayerStats(NamedTuple):
    """Shape bookkeeping of a prunable layer.

    ``rows``/``cols`` are the real weight dims, ``padded_*`` the block-aligned
    dims the pruner works on.
    """
    rows: int
    cols: int
    padded_rows: int
    padded_cols: int
    b: int

    @property
    def block_cols(self):
        # type: () -> int
        return self.padded_cols // self.b

    @property
    def block_rows(self):
        # type: () -> int
        return self.padded_rows // self.b

    @property
    def size(self):
        # type: () -> int
        return self.rows * self.cols


class IterationState(enum.Enum):
    """State of one pruning iteration of a :class:`~crisp.study.PruneStudy`.

    Attributes:
        RUNNING:
            The iteration is in progress.
        COMPLETE:
            The iteration finished and its invariants held.
        FAIL:
            The iteration raised.
    """

    RUNNING = 0
    COMPLETE = 1
    FAIL = 2

    def is_finished(self):
        # type: () -> bool

        return self == IterationState.COMPLETE or self == IterationState.FAIL


class IterationRecord(NamedTuple):
    """Outcome of one pruning iteration.

    Attributes:
        iteration:
            One-based iteration number ``p``.
        state:
            :class:`IterationState` of the iteration.
        kappa_p:
            Target global sparsity of this iteration.
        measured_sparsity:
            Fraction of zero weights over all prunable layers after pruning.
        loss:
            Mean training loss of the last fine-tune epoch.
        acc_uc:
            Test accuracy restricted to samples of the user-preferred classes.
        per_layer_sparsity:
            Sparsity of every layer, in layer order.
        pruned_ranks:
            Number of pruned rank columns per layer.
    """
    iteration: int
    state: IterationState
    kappa_p: float
    measured_sparsity: Optional[float]
    loss: Optional[float]
    acc_uc: Optional[float]
    per_layer_sparsity: List[float]
    pruned_ranks: List[int]
    system_attrs: Dict[str, Any]


def get_approp_n_jobs(n_jobs=-1):
    # type: (int) -> int
    """Number of worker threads to use.

    ``-1`` means every core; on machines with four or more cores at most
    half the cores plus two are used.
    """

    max_jobs = multiprocessing.cpu_count()
    if n_jobs is None or n_jobs == -1:
        n_jobs = max_jobs
    if max_jobs >= 4:
        max_jobs = int(max_jobs / 2) + 2
    n_jobs = max(1, min(int(n_jobs), max_jobs))
    return n_jobs
