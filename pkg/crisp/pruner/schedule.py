#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
crisp/pruner/schedule.py was created on 2024/04/15.
file in :relativeFile
"""
import math
from typing import Any
from typing import Dict
from typing import NamedTuple
from typing import Optional

from crisp.basic import (ArgumentError, ConfigError, NmConfig, ScheduleError, check_block, parse_nm)

DEFAULT_DELTA = 0.05
_TOL = 1e-12


class _PruneSchedule(NamedTuple):
    nm: NmConfig
    b: int
    kappa_target: float
    delta: float
    iterations: int
    fine_tune_epochs: int
    saliency_epochs: int
    samples_per_class: Optional[int]


class PruneSchedule(_PruneSchedule):
    """Sparsity schedule of :func:`~crisp.study.prune_model`.

    Iteration ``p`` targets ``min(kappa_target, (1 - n/m) + p * delta)``.

    Attributes:
        nm:
            N:M ratio inside kept blocks. ``n == m`` gives block-only pruning.
        b:
            Block edge.
        kappa_target:
            Final global sparsity, in ``[1 - n/m, 1)``.
        delta:
            Sparsity added per iteration.
        iterations:
            Number of iterations; the fewest that reach ``kappa_target``
            when left out.
        fine_tune_epochs:
            Epochs of masked fine-tuning after each iteration's pruning.
        saliency_epochs:
            Passes over the user-class samples used to accumulate gradients.
        samples_per_class:
            Samples per user class for saliency; ``None`` uses the profile's.
    """

    def __new__(cls, nm, b, kappa_target, delta=DEFAULT_DELTA, iterations=None, fine_tune_epochs=2,
                saliency_epochs=1, samples_per_class=None):
        nm = parse_nm(nm)
        b = check_block(b, nm)
        kappa_target = float(kappa_target)
        delta = float(delta)
        if not nm.min_sparsity - _TOL <= kappa_target < 1.0:
            raise ArgumentError('kappa_target {} must lie in [{:.4f}, 1) for {}.'.format(
                kappa_target, nm.min_sparsity, nm))
        if not delta > 0:
            raise ArgumentError('delta must be > 0, got {}.'.format(delta))
        gap = max(0.0, kappa_target - nm.min_sparsity)
        if iterations is None:
            iterations = max(1, int(math.ceil(gap / delta - 1e-9)))
        iterations = int(iterations)
        if iterations < 1:
            raise ArgumentError('iterations must be >= 1, got {}.'.format(iterations))
        if nm.min_sparsity + iterations * delta < kappa_target - _TOL:
            raise ScheduleError('{} iterations of {} reach only {:.4f} < kappa_target {}.'.format(
                iterations, delta, nm.min_sparsity + iterations * delta, kappa_target))
        if fine_tune_epochs < 0:
            raise ArgumentError('fine_tune_epochs must be >= 0, got {}.'.format(fine_tune_epochs))
        if saliency_epochs < 1:
            raise ArgumentError('saliency_epochs must be >= 1, got {}.'.format(saliency_epochs))
        if samples_per_class is not None and samples_per_class < 1:
            raise ArgumentError('samples_per_class must be >= 1, got {}.'.format(samples_per_class))
        return super(PruneSchedule, cls).__new__(
            cls, nm, b, kappa_target, delta, iterations, int(fine_tune_epochs), int(saliency_epochs),
            samples_per_class)

    @classmethod
    def from_dict(cls, d):
        # type: (Dict[str, Any]) -> PruneSchedule
        unknown = set(d) - set(cls._fields)
        if unknown:
            raise ConfigError('Unknown schedule keys: {}.'.format(', '.join(sorted(unknown))))
        if 'nm' not in d or 'b' not in d or 'kappa_target' not in d:
            raise ConfigError('Schedule needs "nm", "b" and "kappa_target".')
        return cls(**d)

    def to_dict(self):
        # type: () -> Dict[str, Any]
        d = self._asdict()
        d['nm'] = str(self.nm)
        return d

    def block_only(self):
        # type: () -> PruneSchedule
        """Same schedule with N:M disabled (``m:m``), i.e. plain block pruning.

        The iteration count is rederived since the sparsity floor drops to 0.
        """
        return PruneSchedule(NmConfig(self.nm.m, self.nm.m), self.b, self.kappa_target, self.delta,
                             None, self.fine_tune_epochs, self.saliency_epochs, self.samples_per_class)


def next_kappa(p, schedule):
    # type: (int, PruneSchedule) -> float
    """Target sparsity of iteration ``p`` (one-based)."""
    if not 1 <= p <= schedule.iterations:
        raise ArgumentError('Iteration {} outside [1, {}].'.format(p, schedule.iterations))
    if p == schedule.iterations:
        return schedule.kappa_target
    return min(schedule.kappa_target, schedule.nm.min_sparsity + p * schedule.delta)
