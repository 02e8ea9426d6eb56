#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
tests/test_storage.py was created on 2024/04/26.
file in :relativeFile
"""
import json
import pickle
import unittest

import numpy as np
from numpy.testing import assert_array_equal

from crisp.basic import FormatError, IterationState
from crisp.core import Storage, container
from crisp.core.storage import REPORT_COLUMNS


class TestInMemoryStorage(unittest.TestCase):

    def test_iteration_lifecycle(self):
        storage = Storage()
        index = storage.create_new_iteration(0.55)
        self.assertEqual(storage.get_iteration(index).state, IterationState.RUNNING)
        storage.set_iteration_result(index, 0.56, 0.3, 0.97, [0.5, 0.6], [1, 2])
        storage.set_iteration_system_attr(index, 'saliency_samples', 96)
        storage.set_iteration_state(index, IterationState.COMPLETE)

        record = storage.get_last_complete()
        self.assertEqual(record.iteration, 1)
        self.assertEqual(record.pruned_ranks, [1, 2])
        self.assertEqual(record.system_attrs, {'saliency_samples': 96})
        self.assertTrue(record.state.is_finished())

    def test_dataframe_keeps_complete_only(self):
        storage = Storage()
        for kappa, state in [(0.55, IterationState.COMPLETE), (0.6, IterationState.FAIL)]:
            index = storage.create_new_iteration(kappa)
            storage.set_iteration_result(index, kappa, 0.1, 0.9, [kappa], [1])
            storage.set_iteration_state(index, state)
        df = storage.to_dataframe()
        self.assertEqual(list(df.columns), list(REPORT_COLUMNS))
        self.assertEqual(len(df), 1)
        self.assertEqual(json.loads(df['per_layer_sparsity'][0]), [0.55])
        self.assertAlmostEqual(df['flops_ratio'][0], 0.45)
        self.assertEqual(storage.get_n_iterations(), 2)
        self.assertEqual(storage.get_n_iterations(IterationState.FAIL), 1)

    def test_no_complete(self):
        with self.assertRaises(ValueError):
            Storage().get_last_complete()

    def test_attrs_are_copies(self):
        storage = Storage('study')
        storage.set_study_system_attr('u_c', [1, 4])
        storage.study_system_attrs['u_c'].append(7)
        self.assertEqual(storage.study_system_attrs, {'u_c': [1, 4]})
        self.assertEqual(storage.study_name, 'study')

    def test_pickle(self):
        storage = Storage()
        storage.create_new_iteration(0.6)
        other = pickle.loads(pickle.dumps(storage))
        self.assertEqual(other.get_n_iterations(), 1)
        other.create_new_iteration(0.7)
        self.assertEqual(other.study_uuid, storage.study_uuid)


class TestContainer(unittest.TestCase):

    def test_round_trip(self):
        arrays = [('w', np.arange(6, dtype=np.float64).reshape(2, 3)), ('m', np.array([[True, False]])),
                  ('y', np.arange(3, dtype=np.int64))]
        data = container.dumps('model', arrays, {'n_classes': 3})
        loaded, meta = container.loads('model', data)
        self.assertEqual(meta, {'n_classes': 3})
        for name, arr in arrays:
            assert_array_equal(loaded[name], arr)
            self.assertEqual(loaded[name].dtype, arr.dtype)

    def test_deterministic(self):
        arrays = [('x', np.linspace(0, 1, 5))]
        self.assertEqual(container.dumps('dataset', arrays, {'b': 1, 'a': 2}),
                         container.dumps('dataset', arrays, {'a': 2, 'b': 1}))

    def test_wrong_kind(self):
        data = container.dumps('dataset', [('x', np.zeros(2))])
        with self.assertRaises(FormatError):
            container.loads('model', data)

    def test_truncated_and_trailing(self):
        data = container.dumps('dataset', [('x', np.zeros(4))])
        with self.assertRaises(FormatError):
            container.loads('dataset', data[:-1])
        with self.assertRaises(FormatError):
            container.loads('dataset', data + b'\x00')
        with self.assertRaises(FormatError):
            container.loads('dataset', data[:5])


if __name__ == '__main__':
    unittest.main()
