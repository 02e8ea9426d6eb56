#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
core/storage.py was created on 2024/03/21.
file in :relativeFile
"""

import copy
import json
import threading
import uuid

import pandas as pd

from crisp import basic

from typing import Any  # NOQA
from typing import Dict  # NOQA
from typing import List  # NOQA
from typing import Optional  # NOQA

DEFAULT_STUDY_NAME_PREFIX = 'no-name-'

REPORT_COLUMNS = ('iteration', 'kappa_p', 'measured_sparsity', 'flops_ratio', 'loss', 'acc_uc',
                  'per_layer_sparsity')


class InMemoryStorage(object):
    """Storage of the pruning iterations of one study, kept in process memory.

    This class is not supposed to be directly accessed by library users.
    """

    def __init__(self, study_name=None):
        # type: (Optional[str]) -> None
        self.iterations = []  # type: List[basic.IterationRecord]
        self._study_system_attrs = {}  # type: Dict[str, Any]
        self.study_uuid = str(uuid.uuid4())
        self.study_name = study_name or DEFAULT_STUDY_NAME_PREFIX + self.study_uuid
        self._lock = threading.Lock()

    def __getstate__(self):
        # type: () -> Dict[Any, Any]
        state = self.__dict__.copy()
        del state['_lock']
        return state

    def __setstate__(self, state):
        # type: (Dict[Any, Any]) -> None
        self.__dict__.update(state)
        self._lock = threading.Lock()

    @property
    def study_system_attrs(self):
        with self._lock:
            return copy.deepcopy(self._study_system_attrs)

    def set_study_system_attr(self, key, value):
        # type: (str, Any) -> None
        with self._lock:
            self._study_system_attrs[key] = value

    def create_new_iteration(self, kappa_p):
        # type: (float) -> int
        """Open a RUNNING record for the next iteration and return its index."""

        with self._lock:
            index = len(self.iterations)
            self.iterations.append(
                basic.IterationRecord(
                    iteration=index + 1,
                    state=basic.IterationState.RUNNING,
                    kappa_p=float(kappa_p),
                    measured_sparsity=None,
                    loss=None,
                    acc_uc=None,
                    per_layer_sparsity=[],
                    pruned_ranks=[],
                    system_attrs={}))
        return index

    def set_iteration_result(self, index, measured_sparsity, loss, acc_uc, per_layer_sparsity,
                             pruned_ranks):
        # type: (int, float, float, float, List[float], List[int]) -> None

        with self._lock:
            self.iterations[index] = self.iterations[index]._replace(
                measured_sparsity=float(measured_sparsity),
                loss=float(loss),
                acc_uc=float(acc_uc),
                per_layer_sparsity=[float(s) for s in per_layer_sparsity],
                pruned_ranks=[int(c) for c in pruned_ranks])

    def set_iteration_state(self, index, state):
        # type: (int, basic.IterationState) -> None

        with self._lock:
            self.iterations[index] = self.iterations[index]._replace(state=state)

    def set_iteration_system_attr(self, index, key, value):
        # type: (int, str, Any) -> None

        with self._lock:
            self.iterations[index].system_attrs[key] = value

    def get_iteration(self, index):
        # type: (int) -> basic.IterationRecord

        with self._lock:
            return copy.deepcopy(self.iterations[index])

    def get_all_iterations(self, state=None):
        # type: (Optional[basic.IterationState]) -> List[basic.IterationRecord]

        with self._lock:
            records = copy.deepcopy(self.iterations)
        if state is None:
            return records
        return [r for r in records if r.state == state]

    def get_n_iterations(self, state=None):
        # type: (Optional[basic.IterationState]) -> int

        return len(self.get_all_iterations(state))

    def get_last_complete(self):
        # type: () -> basic.IterationRecord

        complete = self.get_all_iterations(basic.IterationState.COMPLETE)
        if not complete:
            raise ValueError('No iterations are completed yet.')
        return complete[-1]

    def to_dataframe(self):
        # type: () -> pd.DataFrame
        """Completed iterations as report rows.

        ``per_layer_sparsity`` is JSON encoded so the frame maps one-to-one
        onto the CSV report. ``flops_ratio`` is the share of dense
        multiply-accumulates the pruned layers still execute.
        """

        rows = []
        for r in self.get_all_iterations(basic.IterationState.COMPLETE):
            rows.append({
                'iteration': r.iteration,
                'kappa_p': r.kappa_p,
                'measured_sparsity': r.measured_sparsity,
                'flops_ratio': 1.0 - r.measured_sparsity,
                'loss': r.loss,
                'acc_uc': r.acc_uc,
                'per_layer_sparsity': json.dumps([round(s, 10) for s in r.per_layer_sparsity]),
            })
        return pd.DataFrame(rows, columns=list(REPORT_COLUMNS))
