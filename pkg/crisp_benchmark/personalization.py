#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
crisp_benchmark/personalization.py was created on 2024/05/14.
file in :relativeFile

Accuracy on the user classes of the dense model, of hybrid pruning and of
block-only pruning at the same target sparsity, over several seeds. The
sweeps repeat that comparison over the number of user classes and over the
block size.
"""
import numpy as np
import pandas as pd

from crisp.micronet.data import SynthConfig, UserProfile, gen_synthetic
from crisp.micronet.model import MicroModel, ModelConfig
from crisp.pruner.schedule import PruneSchedule
from crisp.study import create_study

TREND_COLUMNS = ['seed', 'dense_acc_uc', 'crisp_acc_uc', 'crisp_sparsity', 'block_acc_uc', 'block_sparsity']
CLASS_SWEEP_COLUMNS = ['n_classes', 'u_c'] + TREND_COLUMNS
BLOCK_SWEEP_COLUMNS = ['b'] + TREND_COLUMNS

# recovery epochs after every pruning step
DESK_FINE_TUNE_EPOCHS = 6


def _prune(model, dataset, schedule, profile, seed):
    study = create_study(model, dataset, schedule, profile, seed=seed)
    study.optimize()
    last = study.storage.get_last_complete()
    return study.dense_accuracy, last.acc_uc, last.measured_sparsity


def personalize(seed, u_c=(1, 4, 7), nm='2:4', b=8, kappa=0.9, fine_tune_epochs=DESK_FINE_TUNE_EPOCHS,
                synth=None, model_config=None):
    """Dense, hybrid and block-only accuracy on ``u_c`` for one seed."""
    synth = synth or SynthConfig()
    model_config = model_config or ModelConfig()
    ds = gen_synthetic(synth.classes, synth.dim, synth.per_class, seed, synth.scale, synth.test_size)
    dense = MicroModel(random_state=seed, **model_config.estimator_params())
    dense.fit(ds.X_train, ds.y_train, n_classes=ds.n_classes)
    profile = UserProfile(u_c)
    schedule = PruneSchedule(nm, b, kappa, fine_tune_epochs=fine_tune_epochs)

    dense_acc, crisp_acc, crisp_sparsity = _prune(dense, ds, schedule, profile, seed)
    _, block_acc, block_sparsity = _prune(dense, ds, schedule.block_only(), profile, seed)
    return {'seed': seed, 'dense_acc_uc': dense_acc, 'crisp_acc_uc': crisp_acc,
            'crisp_sparsity': crisp_sparsity, 'block_acc_uc': block_acc, 'block_sparsity': block_sparsity}


def run_trend(seeds=(1, 2, 3), **kwargs):
    # type: (...) -> pd.DataFrame
    rows = [personalize(seed, **kwargs) for seed in seeds]
    return pd.DataFrame(rows, columns=TREND_COLUMNS)


def pick_classes(n_classes, size, seed):
    # type: (int, int, int) -> tuple
    """``size`` distinct classes out of ``n_classes``, drawn from ``seed``, ascending."""
    rng = np.random.RandomState(seed)
    return tuple(int(c) for c in np.sort(rng.choice(n_classes, size, replace=False)))


def run_class_sweep(sizes=(1, 3, 5), seeds=(1, 2, 3), **kwargs):
    # type: (...) -> pd.DataFrame
    """:func:`personalize` over user profiles of growing size.

    Every seed draws its own ``u_c`` of each size.
    """
    classes = (kwargs.get('synth') or SynthConfig()).classes
    rows = []
    for size in sizes:
        for seed in seeds:
            u_c = pick_classes(classes, size, seed)
            row = personalize(seed, u_c=u_c, **kwargs)
            row.update(n_classes=size, u_c=' '.join(str(c) for c in u_c))
            rows.append(row)
    return pd.DataFrame(rows, columns=CLASS_SWEEP_COLUMNS)


def run_block_sweep(blocks=(4, 8, 16), seeds=(1, 2, 3), **kwargs):
    # type: (...) -> pd.DataFrame
    """:func:`personalize` over block sizes, hybrid and block-only at each."""
    rows = []
    for b in blocks:
        for seed in seeds:
            row = personalize(seed, b=b, **kwargs)
            row['b'] = b
            rows.append(row)
    return pd.DataFrame(rows, columns=BLOCK_SWEEP_COLUMNS)


if __name__ == '__main__':
    trend = run_trend()
    print(trend.to_string(index=False))
    trend.to_csv('personalization_trend.csv', index=False)
    run_class_sweep().to_csv('personalization_classes.csv', index=False)
    run_block_sweep().to_csv('personalization_blocks.csv', index=False)
