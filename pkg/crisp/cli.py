#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
crisp/cli.py was created on 2024/05/09.
file in :relativeFile

Command line entry point. Every subcommand writes its artifacts and a JSON
run manifest into ``--out``.

    crisp gen-data --out run/
    crisp train --data run/dataset.bin --out run/
    crisp prune --config c.json --out run/
    crisp eval --model run/final.bin --classes 1,4,7
    crisp report-metadata --s 64 --k 256 --kprime 128 --block 16 --nm 2:4
    crisp spmm-check --cases 1000
    crisp perf-sweep --out sweep/
    crisp inspect run/layer_0.crsp
"""
import argparse
import json
import os
import sys
from typing import Any
from typing import Dict
from typing import List
from typing import Optional
from typing import Sequence

import numpy as np
import pandas as pd
import scipy
import sklearn

import crisp
from crisp.basic import DEFAULT_BLOCK_SIZES, ArgumentError, ConfigError, CrispError, InvariantError, parse_nm
from crisp.core.tensor import matmul_dense
from crisp.depens import logging
from crisp.micronet.data import (SynthConfig, UserProfile, gen_synthetic, load_dataset, parse_classes,
                                 save_dataset)
from crisp.micronet.model import MicroModel, ModelConfig, load_model, save_model
from crisp.micronet.train import curve_dataframe, evaluate
from crisp.perf import ExecutionMode, HwConfig, RESNET50_LAYERS, model_layers, sweep
from crisp.pruner.schedule import PruneSchedule
from crisp.sparse.hybrid import decode, encode, random_hybrid_mask
from crisp.sparse.kernel import KernelStats, spmm
from crisp.sparse.metadata import flops_ratio, metadata_report
from crisp.sparse.serialize import read_crsp, read_header, write_crsp
from crisp.study import DEFAULT_DENSE_EPOCHS, create_study

_logger = logging.get_logger(__name__)

SEED_ENV = 'CRISP_SEED'
PRUNE_CONFIG_KEYS = ('seed', 'data', 'model', 'profile', 'schedule', 'dense_epochs', 'restrict')

_SYNTH_DEFAULTS = SynthConfig()
_MODEL_DEFAULTS = ModelConfig()


def _ints(text):
    try:
        return tuple(int(v) for v in text.split(',') if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError('expected comma separated integers, got {!r}'.format(text))


def _floats(text):
    try:
        return tuple(float(v) for v in text.split(',') if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError('expected comma separated numbers, got {!r}'.format(text))


def _strings(text):
    return tuple(v.strip() for v in text.split(',') if v.strip())


def resolve_seed(seed):
    # type: (int) -> int
    """``seed`` unless the CRISP_SEED environment variable overrides it."""
    value = os.environ.get(SEED_ENV)
    if value is None or not value.strip():
        return int(seed)
    try:
        return int(value)
    except ValueError:
        raise ConfigError('{} must be an integer, got {!r}.'.format(SEED_ENV, value))


def library_versions():
    # type: () -> Dict[str, str]
    return {
        'crisp': crisp.__version__,
        'numpy': np.__version__,
        'pandas': pd.__version__,
        'scikit-learn': sklearn.__version__,
        'scipy': scipy.__version__,
    }


def _out_dir(path):
    # type: (str) -> str
    os.makedirs(path, exist_ok=True)
    return path


def _write_json(path, payload):
    with open(path, 'w') as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write('\n')


def write_manifest(out, command, seed, config, outputs, results=None):
    # type: (str, str, Optional[int], Dict[str, Any], Sequence[str], Optional[Dict[str, Any]]) -> str
    """Write ``manifest.json`` for ``prune`` and ``<command>_manifest.json`` otherwise.

    ``config`` is exactly what the run was started with, so the run can be
    repeated from it; anything measured goes into ``results``.
    """
    name = 'manifest.json' if command == 'prune' else '{}_manifest.json'.format(command)
    path = os.path.join(out, name)
    payload = {
        'command': command,
        'config': config,
        'outputs': sorted(outputs),
        'seed': seed,
        'versions': library_versions(),
    }
    if results is not None:
        payload['results'] = results
    _write_json(path, payload)
    return path


def _args_config(args):
    # type: (argparse.Namespace) -> Dict[str, Any]
    skip = {'func', 'verbose', 'quiet', 'command'}
    config = {}
    for key, value in vars(args).items():
        if key in skip:
            continue
        config[key] = list(value) if isinstance(value, tuple) else value
    return config


def _write_csv(df, out, name, outputs):
    # type: (pd.DataFrame, str, str, List[str]) -> None
    df.to_csv(os.path.join(out, name), index=False)
    outputs.append(name)


def cmd_gen_data(args):
    seed = resolve_seed(args.seed)
    out = _out_dir(args.out)
    ds = gen_synthetic(args.classes, args.dim, args.per_class, seed, args.scale, args.test_size)
    save_dataset(os.path.join(out, 'dataset.bin'), ds)
    _logger.info('Wrote {} train and {} test samples of {} classes.'.format(
        len(ds.y_train), len(ds.y_test), ds.n_classes))
    write_manifest(out, 'gen-data', seed, _args_config(args), ['dataset.bin'])
    return 0


def cmd_train(args):
    seed = resolve_seed(args.seed)
    out = _out_dir(args.out)
    ds = load_dataset(args.data)
    model = MicroModel(hidden=args.hidden, lr=args.lr, momentum=args.momentum, weight_decay=args.weight_decay,
                       batch_size=args.batch_size, epochs=args.epochs, random_state=seed)
    model.fit(ds.X_train, ds.y_train, n_classes=ds.n_classes)
    outputs = ['dense.bin']
    save_model(os.path.join(out, 'dense.bin'), model)
    _write_csv(curve_dataframe(model), out, 'train_curve.csv', outputs)
    acc = float(model.score(ds.X_test, ds.y_test))
    print('test_acc {:.4f}'.format(acc))
    write_manifest(out, 'train', seed, _args_config(args), outputs)
    return 0


def read_json(path):
    # type: (str) -> Any
    with open(path) as f:
        try:
            return json.load(f)
        except ValueError as e:
            raise ConfigError('{} is not valid JSON: {}'.format(path, e))


def from_config(name, build, value):
    """``build(value)``, with a wrongly typed value reported as a :class:`ConfigError`."""
    try:
        return build(value)
    except CrispError:
        raise
    except (TypeError, ValueError) as e:
        raise ConfigError('Bad "{}" config: {}'.format(name, e))


def load_prune_config(path):
    # type: (str) -> Dict[str, Any]
    """Read a ``prune`` JSON config; unknown top-level keys are errors."""
    config = read_json(path)
    if not isinstance(config, dict):
        raise ConfigError('{} must hold a JSON object.'.format(path))
    unknown = set(config) - set(PRUNE_CONFIG_KEYS)
    if unknown:
        raise ConfigError('Unknown config keys: {}.'.format(', '.join(sorted(unknown))))
    for key in ('profile', 'schedule'):
        if key not in config:
            raise ConfigError('Config needs "{}".'.format(key))
    return config


def cmd_prune(args):
    config = load_prune_config(args.config)
    seed = resolve_seed(config.get('seed', 0))
    config['seed'] = seed
    data_cfg = from_config('data', SynthConfig.from_dict, config.get('data', {}))
    model_cfg = from_config('model', ModelConfig.from_dict, config.get('model', {}))
    profile = from_config('profile', UserProfile.from_dict, config['profile'])
    schedule = from_config('schedule', PruneSchedule.from_dict, config['schedule'])
    dense_epochs = from_config('dense_epochs', int, config.get('dense_epochs', DEFAULT_DENSE_EPOCHS))
    restrict = bool(config.get('restrict', False))
    out = _out_dir(args.out)
    outputs = []  # type: List[str]

    ds = gen_synthetic(data_cfg.classes, data_cfg.dim, data_cfg.per_class, seed, data_cfg.scale,
                       data_cfg.test_size)
    save_dataset(os.path.join(out, 'dataset.bin'), ds)
    outputs.append('dataset.bin')

    dense = MicroModel(random_state=seed, **model_cfg.estimator_params())
    dense.fit(ds.X_train, ds.y_train, n_classes=ds.n_classes)
    save_model(os.path.join(out, 'dense.bin'), dense)
    outputs.append('dense.bin')

    study = create_study(dense, ds, schedule, profile, seed=seed, dense_epochs=dense_epochs, restrict=restrict)
    study.optimize(show_progress_bar=args.progress)
    save_model(os.path.join(out, 'final.bin'), study.model)
    outputs.append('final.bin')

    layers = []
    for i, (h, padding) in enumerate(study.compressed_layers()):
        name = 'layer_{}.crsp'.format(i)
        write_crsp(os.path.join(out, name), h)
        outputs.append(name)
        layers.append({'file': name, 'padding': list(padding), 'k_prime': h.k_prime,
                       'overall_sparsity': h.overall_sparsity})
    _write_csv(study.iterations_dataframe(), out, 'iterations.csv', outputs)

    write_manifest(out, 'prune', seed, config, outputs,
                   results={'dense_acc_uc': study.dense_accuracy, 'layers': layers})
    last = study.storage.get_last_complete()
    print('dense_acc_uc {:.4f} final_acc_uc {:.4f} sparsity {:.4f}'.format(
        study.dense_accuracy, last.acc_uc, last.measured_sparsity))
    return 0


def cmd_eval(args):
    model_dir = os.path.dirname(os.path.abspath(args.model))
    data_path = args.data or os.path.join(model_dir, 'dataset.bin')
    out = _out_dir(args.out or model_dir)
    model = load_model(args.model)
    ds = load_dataset(data_path)
    profile = UserProfile(parse_classes(args.classes))
    profile.check(model.n_classes_)
    acc = evaluate(model, ds.X_test, ds.y_test, profile.u_c, restrict=args.restrict)
    samples = int(np.isin(ds.y_test, profile.u_c).sum())
    classes = ','.join(str(c) for c in profile.u_c)
    print('acc_uc {:.4f} classes {} samples {} restrict {}'.format(acc, classes, samples, args.restrict))

    outputs = []  # type: List[str]
    df = pd.DataFrame([{'model': os.path.basename(args.model), 'classes': classes, 'restrict': args.restrict,
                        'samples': samples, 'acc_uc': acc, 'sparsity': model.sparsity()}],
                      columns=['model', 'classes', 'restrict', 'samples', 'acc_uc', 'sparsity'])
    _write_csv(df, out, 'eval.csv', outputs)
    write_manifest(out, 'eval', None, _args_config(args), outputs)
    return 0


def cmd_report_metadata(args):
    seed = resolve_seed(args.seed)
    out = _out_dir(args.out)
    nm = parse_nm(args.nm)
    report = metadata_report(args.s, args.k, args.kprime, nm, args.block, seed=seed)
    row = dict(s=args.s, k=args.k, k_prime=args.kprime, b=args.block, nm=str(nm),
               flops_ratio=flops_ratio(args.k, args.kprime, nm), **report._asdict())
    df = pd.DataFrame([row], columns=['s', 'k', 'k_prime', 'b', 'nm'] + list(report._fields) + ['flops_ratio'])
    for key in df.columns:
        print('{} {}'.format(key, row[key]))
    outputs = []  # type: List[str]
    _write_csv(df, out, 'metadata.csv', outputs)
    write_manifest(out, 'report-metadata', seed, _args_config(args), outputs)
    return 0


def _spmm_case(case, rng, threads):
    nm = parse_nm(('1:4', '2:4', '3:4')[rng.randint(3)])
    b = (4, 8, 16)[rng.randint(3)]
    rows, cols = b * rng.randint(1, 4), b * rng.randint(1, 5)
    kc = rng.randint(0, cols // b + 1)
    batch = rng.randint(1, 9)
    integer = case % 2 == 0
    if integer:
        w = rng.randint(-8, 9, size=(rows, cols)).astype(np.float64)
        acts = rng.randint(-8, 9, size=(batch, cols)).astype(np.float64)
    else:
        w = rng.standard_normal((rows, cols))
        acts = rng.standard_normal((batch, cols))
    mask = random_hybrid_mask(rows, cols, nm, b, kc, rng, fill=0.8)
    h = encode(w, mask, nm, b)
    stats = KernelStats()
    got = spmm(h, acts, n_jobs=threads, stats=stats)
    expected = matmul_dense(acts, decode(h))
    scale = max(float(np.abs(expected).max()), 1e-300) if expected.size else 1.0
    error = float(np.abs(got - expected).max()) / scale if expected.size else 0.0
    ok = error == 0.0 if integer else error <= 1e-12
    ok = ok and stats.reads_per_output == h.k_prime * nm.n / nm.m
    return {'case': case, 'nm': str(nm), 'b': b, 's': rows, 'k': cols, 'k_prime': h.k_prime, 'batch': batch,
            'integer': integer, 'macs': stats.macs, 'reads_per_output': stats.reads_per_output, 'rel_error': error,
            'ok': ok}


def cmd_spmm_check(args):
    seed = resolve_seed(args.seed)
    out = _out_dir(args.out)
    rng = np.random.RandomState(seed)
    rows = [_spmm_case(case, rng, args.threads) for case in range(args.cases)]
    df = pd.DataFrame(rows, columns=['case', 'nm', 'b', 's', 'k', 'k_prime', 'batch', 'integer', 'macs',
                                     'reads_per_output', 'rel_error', 'ok'])
    outputs = []  # type: List[str]
    _write_csv(df, out, 'spmm_check.csv', outputs)
    write_manifest(out, 'spmm-check', seed, _args_config(args), outputs)
    failed = df[~df['ok']]
    print('spmm-check {} cases, {} mismatches, max rel_error {:.3e}'.format(
        len(df), len(failed), df['rel_error'].max() if len(df) else 0.0))
    if len(failed):
        raise InvariantError('spmm differs from decode-then-dense on cases {}.'.format(
            failed['case'].tolist()[:10]))
    return 0


def cmd_perf_sweep(args):
    out = _out_dir(args.out)
    hw = HwConfig()
    if args.hw:
        hw = from_config('hw', HwConfig.from_dict, read_json(args.hw))
    try:
        modes = [ExecutionMode[m.upper()] for m in args.modes]
    except KeyError as e:
        raise ArgumentError('Unknown execution mode {}; choose from {}.'.format(
            e, ', '.join(m.name for m in ExecutionMode)))
    layers = RESNET50_LAYERS if args.model is None else model_layers(load_model(args.model), args.batch)
    df = sweep(layers, args.nm, args.blocks, args.block_sparsity, hw, modes, n_jobs=args.threads)
    outputs = []  # type: List[str]
    _write_csv(df, out, 'perf_sweep.csv', outputs)
    config = _args_config(args)
    config['hw'] = hw._asdict()
    write_manifest(out, 'perf-sweep', None, config, outputs)
    print('perf-sweep {} points, max speedup {:.2f}'.format(len(df), df['speedup'].max() if len(df) else 0.0))
    return 0


def cmd_inspect(args):
    with open(args.file, 'rb') as f:
        header = read_header(f.read())
    info = dict(header)
    h = read_crsp(args.file)
    info.update(nnz=h.nnz, k_prime=h.k_prime, overall_sparsity=h.overall_sparsity, well_formed=True)
    for key in sorted(info):
        print('{} {}'.format(key, info[key]))
    if args.out:
        out = _out_dir(args.out)
        name = os.path.basename(args.file) + '.json'
        _write_json(os.path.join(out, name), info)
        write_manifest(out, 'inspect', None, _args_config(args), [name])
    return 0


def build_parser():
    # type: () -> argparse.ArgumentParser
    parser = argparse.ArgumentParser(
        prog='crisp',
        description='Class-aware hybrid N:M and block sparsity: data, training, pruning, formats, cost model.',
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument('-v', '--verbose', action='store_true', help='log at DEBUG level')
    parser.add_argument('-q', '--quiet', action='store_true', help='log warnings and errors only')
    sub = parser.add_subparsers(dest='command', metavar='command')
    sub.required = True

    p = sub.add_parser('gen-data', help='generate the synthetic classification task')
    p.add_argument('--out', required=True)
    p.add_argument('--classes', type=int, default=_SYNTH_DEFAULTS.classes)
    p.add_argument('--dim', type=int, default=_SYNTH_DEFAULTS.dim)
    p.add_argument('--per-class', type=int, default=_SYNTH_DEFAULTS.per_class)
    p.add_argument('--scale', type=float, default=_SYNTH_DEFAULTS.scale)
    p.add_argument('--test-size', type=float, default=_SYNTH_DEFAULTS.test_size)
    p.add_argument('--seed', type=int, default=0)
    p.set_defaults(func=cmd_gen_data)

    p = sub.add_parser('train', help='train a dense model')
    p.add_argument('--data', required=True)
    p.add_argument('--out', required=True)
    p.add_argument('--hidden', type=_ints, default=_MODEL_DEFAULTS.hidden)
    p.add_argument('--epochs', type=int, default=_MODEL_DEFAULTS.epochs)
    p.add_argument('--lr', type=float, default=_MODEL_DEFAULTS.lr)
    p.add_argument('--momentum', type=float, default=_MODEL_DEFAULTS.momentum)
    p.add_argument('--weight-decay', type=float, default=_MODEL_DEFAULTS.weight_decay)
    p.add_argument('--batch-size', type=int, default=_MODEL_DEFAULTS.batch_size)
    p.add_argument('--seed', type=int, default=0)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser('prune', help='generate, train and prune for a user profile')
    p.add_argument('--config', required=True, help='JSON with seed/data/model/profile/schedule keys')
    p.add_argument('--out', required=True)
    p.add_argument('--progress', action='store_true', help='show a progress bar over iterations')
    p.set_defaults(func=cmd_prune)

    p = sub.add_parser('eval', help='accuracy of a model on the user classes')
    p.add_argument('--model', required=True)
    p.add_argument('--classes', required=True, help='comma separated class ids, e.g. 1,4,7')
    p.add_argument('--data', default=None, help='defaults to dataset.bin next to the model')
    p.add_argument('--out', default=None, help="defaults to the model's directory")
    p.add_argument('--restrict', action='store_true', help='argmax over the user classes only')
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser('report-metadata', help='metadata bits of the hybrid, CSR and ELLPACK layouts')
    p.add_argument('--s', type=int, required=True)
    p.add_argument('--k', type=int, required=True)
    p.add_argument('--kprime', type=int, required=True)
    p.add_argument('--block', type=int, required=True)
    p.add_argument('--nm', required=True)
    p.add_argument('--seed', type=int, default=0)
    p.add_argument('--out', default='.')
    p.set_defaults(func=cmd_report_metadata)

    p = sub.add_parser('spmm-check', help='compare the compressed kernel with decode-then-dense')
    p.add_argument('--cases', type=int, default=1000)
    p.add_argument('--seed', type=int, default=0)
    p.add_argument('--threads', type=int, default=1)
    p.add_argument('--out', default='.')
    p.set_defaults(func=cmd_spmm_check)

    p = sub.add_parser('perf-sweep', help='roofline speedup and energy over sparsity configurations')
    p.add_argument('--hw', default=None, help='JSON with HwConfig fields')
    p.add_argument('--nm', type=_strings, default=('1:4', '2:4', '3:4'))
    p.add_argument('--blocks', type=_ints, default=DEFAULT_BLOCK_SIZES)
    p.add_argument('--block-sparsity', type=_floats, default=(0.5, 0.6, 0.7, 0.8, 0.9))
    p.add_argument('--modes', type=_strings, default=('DENSE', 'CRISP', 'STC_2_4', 'DSTC'))
    p.add_argument('--model', default=None, help='sweep the layers of this model instead of ResNet-50')
    p.add_argument('--batch', type=int, default=1)
    p.add_argument('--threads', type=int, default=1)
    p.add_argument('--out', default='.')
    p.set_defaults(func=cmd_perf_sweep)

    p = sub.add_parser('inspect', help='print a .crsp header and check its invariants')
    p.add_argument('file')
    p.add_argument('--out', default=None)
    p.set_defaults(func=cmd_inspect)
    return parser


def run(argv=None):
    # type: (Optional[Sequence[str]]) -> int
    """Parse ``argv`` and run one subcommand.

    Returns:
        0 on success, 1 on a runtime error, 2 on an argument error.
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 2

    if args.verbose:
        logging.set_verbosity(logging.DEBUG)
    elif args.quiet:
        logging.set_verbosity(logging.WARNING)

    try:
        return args.func(args)
    except (CrispError, OSError) as e:
        _logger.error('{} failed: {}'.format(args.command, e))
        return 1


def main():
    sys.exit(run(sys.argv[1:]))


if __name__ == '__main__':
    main()
