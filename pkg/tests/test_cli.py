#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
tests/test_cli.py was created on 2024/05/10.
file in :relativeFile
"""
import contextlib
import io
import json
import os
import shutil
import tempfile
import unittest
from unittest import mock

import pandas as pd

from crisp.cli import SEED_ENV, run
from crisp.depens import logging
from crisp.sparse.serialize import read_crsp

PRUNE_CONFIG = {
    'seed': 3,
    'data': {'classes': 4, 'dim': 32, 'per_class': 60},
    'model': {'hidden': [32], 'epochs': 5},
    'profile': {'u_c': [1, 3], 'h_per_class': 8},
    'schedule': {'nm': '2:4', 'b': 8, 'kappa_target': 0.7, 'fine_tune_epochs': 1},
    'dense_epochs': 1,
}


class CliTestCase(unittest.TestCase):

    def setUp(self):
        self.tmp = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.tmp, ignore_errors=True)
        logging.set_verbosity(logging.INFO)

    def path(self, *parts):
        return os.path.join(self.tmp, *parts)

    def invoke(self, *argv):
        buf = io.StringIO()
        with contextlib.redirect_stdout(buf), contextlib.redirect_stderr(io.StringIO()):
            code = run(['-q'] + list(argv))
        return code, buf.getvalue()

    def manifest(self, *parts):
        with open(self.path(*parts)) as f:
            return json.load(f)

    def write_config(self, config, name='config.json'):
        path = self.path(name)
        with open(path, 'w') as f:
            json.dump(config, f)
        return path


class TestArguments(CliTestCase):

    def test_unknown_flag(self):
        self.assertEqual(self.invoke('gen-data', '--out', self.tmp, '--bogus')[0], 2)

    def test_missing_command(self):
        self.assertEqual(self.invoke()[0], 2)

    def test_bad_number_list(self):
        self.assertEqual(self.invoke('perf-sweep', '--blocks', '16,x', '--out', self.tmp)[0], 2)

    def test_unknown_mode(self):
        self.assertEqual(self.invoke('perf-sweep', '--modes', 'sparse', '--out', self.tmp)[0], 1)


class TestReportMetadata(CliTestCase):

    def test_example(self):
        code, out = self.invoke('report-metadata', '--s', '64', '--k', '256', '--kprime', '128',
                                '--block', '16', '--nm', '2:4', '--out', self.tmp)
        self.assertEqual(code, 0)
        self.assertIn('crisp_total_bits 8288', out.splitlines())
        df = pd.read_csv(self.path('metadata.csv'))
        self.assertEqual(int(df['crisp_total_bits'][0]), 8288)
        manifest = self.manifest('report-metadata_manifest.json')
        self.assertEqual(manifest['command'], 'report-metadata')
        self.assertEqual(manifest['outputs'], ['metadata.csv'])
        self.assertIn('numpy', manifest['versions'])

    def test_bad_nm(self):
        code, _ = self.invoke('report-metadata', '--s', '64', '--k', '256', '--kprime', '128',
                              '--block', '16', '--nm', '5:4', '--out', self.tmp)
        self.assertEqual(code, 1)


class TestDataAndTraining(CliTestCase):

    def test_gen_train_eval(self):
        self.assertEqual(self.invoke('gen-data', '--out', self.tmp, '--classes', '4', '--dim', '16',
                                     '--per-class', '40', '--seed', '2')[0], 0)
        self.assertTrue(os.path.exists(self.path('dataset.bin')))
        self.assertEqual(self.manifest('gen-data_manifest.json')['seed'], 2)

        code, out = self.invoke('train', '--data', self.path('dataset.bin'), '--out', self.tmp,
                                '--hidden', '16', '--epochs', '3')
        self.assertEqual(code, 0)
        self.assertTrue(out.startswith('test_acc '))
        curve = pd.read_csv(self.path('train_curve.csv'))
        self.assertEqual(len(curve), 3)

        code, out = self.invoke('eval', '--model', self.path('dense.bin'), '--classes', '0,2')
        self.assertEqual(code, 0)
        self.assertIn('classes 0,2 samples 16', out)
        row = pd.read_csv(self.path('eval.csv')).iloc[0]
        self.assertEqual(row['samples'], 16)
        self.assertEqual(row['sparsity'], 0.0)
        self.assertIsNone(self.manifest('eval_manifest.json')['seed'])

    def test_seed_from_environment(self):
        with mock.patch.dict(os.environ, {SEED_ENV: '7'}):
            self.assertEqual(self.invoke('gen-data', '--out', self.tmp, '--per-class', '10')[0], 0)
        self.assertEqual(self.manifest('gen-data_manifest.json')['seed'], 7)

    def test_bad_seed_environment(self):
        with mock.patch.dict(os.environ, {SEED_ENV: 'seven'}):
            self.assertEqual(self.invoke('gen-data', '--out', self.tmp, '--per-class', '10')[0], 1)

    def test_missing_dataset(self):
        code, _ = self.invoke('train', '--data', self.path('nope.bin'), '--out', self.tmp)
        self.assertEqual(code, 1)

    def test_class_outside_model(self):
        self.invoke('gen-data', '--out', self.tmp, '--classes', '3', '--dim', '8', '--per-class', '10')
        self.invoke('train', '--data', self.path('dataset.bin'), '--out', self.tmp, '--hidden', '8',
                    '--epochs', '1')
        code, _ = self.invoke('eval', '--model', self.path('dense.bin'), '--classes', '5')
        self.assertEqual(code, 1)


class TestPrune(CliTestCase):

    def prune(self, out_name='run', config=None):
        config_path = self.write_config(config or PRUNE_CONFIG, out_name + '.json')
        return self.invoke('prune', '--config', config_path, '--out', self.path(out_name))

    def test_prune_then_eval(self):
        code, out = self.prune()
        self.assertEqual(code, 0)
        self.assertTrue(out.startswith('dense_acc_uc '))
        manifest = self.manifest('run', 'manifest.json')
        self.assertEqual(manifest['seed'], 3)
        self.assertEqual(manifest['config']['schedule'], PRUNE_CONFIG['schedule'])
        for name in ('dataset.bin', 'dense.bin', 'final.bin', 'iterations.csv', 'layer_0.crsp', 'layer_1.crsp'):
            self.assertIn(name, manifest['outputs'])
            self.assertTrue(os.path.exists(self.path('run', name)))

        report = pd.read_csv(self.path('run', 'iterations.csv'))
        self.assertEqual(list(report['iteration']), [1, 2, 3, 4])
        self.assertGreaterEqual(report['measured_sparsity'].iloc[-1], 0.7 - 1e-9)

        layers = manifest['results']['layers']
        self.assertEqual(layers[1]['padding'], [4, 32, 4, 0])
        h = read_crsp(self.path('run', 'layer_0.crsp'))
        self.assertEqual((h.orig_rows, h.orig_cols, h.b), (32, 32, 8))
        self.assertEqual(h.k_prime, layers[0]['k_prime'])

        code, out = self.invoke('eval', '--model', self.path('run', 'final.bin'), '--classes', '1,3')
        self.assertEqual(code, 0)
        self.assertIn('classes 1,3 samples 24', out)

    def test_rerun_from_manifest(self):
        self.assertEqual(self.prune('first')[0], 0)
        config = self.manifest('first', 'manifest.json')['config']
        self.assertEqual(self.prune('second', config)[0], 0)
        for name in ('final.bin', 'iterations.csv', 'layer_0.crsp', 'layer_1.crsp'):
            with open(self.path('first', name), 'rb') as a, open(self.path('second', name), 'rb') as b:
                self.assertEqual(a.read(), b.read(), name)

    def test_unknown_config_key(self):
        config = dict(PRUNE_CONFIG, epochs=3)
        self.assertEqual(self.prune(config=config)[0], 1)

    def test_unknown_schedule_key(self):
        config = dict(PRUNE_CONFIG, schedule=dict(PRUNE_CONFIG['schedule'], kappa=0.7))
        self.assertEqual(self.prune(config=config)[0], 1)

    def test_missing_profile(self):
        config = {k: v for k, v in PRUNE_CONFIG.items() if k != 'profile'}
        self.assertEqual(self.prune(config=config)[0], 1)

    def test_wrong_typed_value(self):
        config = dict(PRUNE_CONFIG, schedule=dict(PRUNE_CONFIG['schedule'], kappa_target='high'))
        self.assertEqual(self.prune(config=config)[0], 1)
        self.assertEqual(self.prune('epochs', dict(PRUNE_CONFIG, dense_epochs='many'))[0], 1)

    def test_inspect(self):
        self.assertEqual(self.prune()[0], 0)
        code, out = self.invoke('inspect', self.path('run', 'layer_1.crsp'), '--out', self.path('info'))
        self.assertEqual(code, 0)
        lines = out.splitlines()
        self.assertIn('b 8', lines)
        self.assertIn('orig_rows 8', lines)
        self.assertIn('well_formed True', lines)
        with open(self.path('info', 'layer_1.crsp.json')) as f:
            self.assertEqual(json.load(f)['m'], 4)

    def test_inspect_corrupted(self):
        path = self.path('bad.crsp')
        with open(path, 'wb') as f:
            f.write(b'XXXX' + bytes(20))
        self.assertEqual(self.invoke('inspect', path)[0], 1)


class TestChecks(CliTestCase):

    def test_spmm_check(self):
        code, out = self.invoke('spmm-check', '--cases', '40', '--threads', '2', '--out', self.tmp)
        self.assertEqual(code, 0)
        self.assertIn('0 mismatches', out)
        df = pd.read_csv(self.path('spmm_check.csv'))
        self.assertEqual(len(df), 40)
        self.assertTrue(df['ok'].all())
        self.assertTrue((df.loc[df['integer'], 'rel_error'] == 0).all())

    def test_perf_sweep(self):
        hw = self.write_config({'mac_lanes': 128}, 'hw.json')
        code, _ = self.invoke('perf-sweep', '--hw', hw, '--nm', '2:4', '--blocks', '16',
                              '--block-sparsity', '0.5,0.8', '--out', self.tmp)
        self.assertEqual(code, 0)
        df = pd.read_csv(self.path('perf_sweep.csv'))
        self.assertEqual(len(df), 5 * 4 * 2)
        self.assertEqual(set(df['mode']), {'DENSE', 'CRISP', 'STC_2_4', 'DSTC'})
        manifest = self.manifest('perf-sweep_manifest.json')
        self.assertEqual(manifest['config']['hw']['mac_lanes'], 128)

    def test_perf_sweep_bad_hw(self):
        hw = self.write_config({'lanes': 128}, 'hw.json')
        self.assertEqual(self.invoke('perf-sweep', '--hw', hw, '--out', self.tmp)[0], 1)

    def test_perf_sweep_malformed_hw(self):
        path = self.path('hw.json')
        with open(path, 'w') as f:
            f.write('{"mac_lanes": 128,')
        self.assertEqual(self.invoke('perf-sweep', '--hw', path, '--out', self.tmp)[0], 1)
        hw = self.write_config({'mac_lanes': 'many'}, 'typed.json')
        self.assertEqual(self.invoke('perf-sweep', '--hw', hw, '--out', self.tmp)[0], 1)


if __name__ == '__main__':
    unittest.main()
