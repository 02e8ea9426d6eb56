#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
crisp/study.py was created on 2024/04/25.
file in :relativeFile
"""
from typing import Any
from typing import Dict
from typing import List
from typing import Optional
from typing import Tuple

import numpy as np
import pandas as pd
from sklearn.utils.validation import check_is_fitted
from tqdm import tqdm

from crisp import basic
from crisp.core import Storage
from crisp.core.tensor import pad_to_blocks, unpad_blocks
from crisp.depens import logging
from crisp.micronet.data import SynthDataset, UserProfile, class_subset, sample_per_class
from crisp.micronet.model import MicroModel, cross_entropy, forward
from crisp.micronet.train import accumulate_class_gradients, evaluate, fine_tune, train
from crisp.pruner.saliency import (apply_block_prune, block_scores, class_saliency, column_aggregate,
                                   global_rank, layer_stats, nm_project, row_sort, select_prune_set)
from crisp.pruner.schedule import PruneSchedule, next_kappa
from crisp.sparse.hybrid import HybridSparseMatrix, block_keep_flags, decode, encode, validate_pattern

DEFAULT_DENSE_EPOCHS = 5


class PruneStudy(object):
    """Iterative class-aware hybrid pruning of one :class:`MicroModel`.

    Note that the direct use of this constructor is not recommended; use
    :func:`create_study`.

    Every iteration fine-tunes on samples of the user classes, accumulates
    their gradients into saliency scores, re-selects N:M positions inside
    the kept blocks, prunes the cheapest rank columns across the network
    and fine-tunes the masked model.

    Args:
        study_name:
            Study's name.
        storage:
            :class:`~crisp.core.storage.InMemoryStorage` holding iteration records.
        model:
            Fitted model, pruned in place.
        dataset:
            Train/test data of the task.
        schedule:
            :class:`~crisp.pruner.schedule.PruneSchedule`.
        profile:
            :class:`~crisp.micronet.data.UserProfile` with the user classes.
        seed:
            Base seed of every sampling and shuffling step.
        dense_epochs:
            Epochs of dense fine-tuning on the user classes before pruning.
        restrict:
            Evaluate with the argmax restricted to the user classes.
    """

    def __init__(self, study_name, storage, model, dataset, schedule, profile, seed=0,
                 dense_epochs=DEFAULT_DENSE_EPOCHS, restrict=False):
        # type: (str, Storage, MicroModel, SynthDataset, PruneSchedule, UserProfile, int, int, bool) -> None
        self.study_name = study_name
        self.storage = storage
        self.model = model
        self.dataset = dataset
        self.schedule = schedule
        if schedule.samples_per_class is not None:
            profile = profile._replace(h_per_class=schedule.samples_per_class)
        self.profile = profile
        self.seed = seed
        self.dense_epochs = dense_epochs
        self.restrict = restrict
        self.layer_stats = [layer_stats(layer.shape, schedule.b) for layer in model.layers_]
        self.pruned_ranks = [0] * len(model.layers_)
        self._padded_masks = None  # type: Optional[List[np.ndarray]]
        self.logger = logging.get_logger(__name__)

    def __getstate__(self):
        # type: () -> Dict[Any, Any]

        state = self.__dict__.copy()
        del state['logger']
        return state

    def __setstate__(self, state):
        # type: (Dict[Any, Any]) -> None

        self.__dict__.update(state)
        self.logger = logging.get_logger(__name__)

    @property
    def iterations(self):
        # type: () -> List[basic.IterationRecord]
        return self.storage.get_all_iterations()

    @property
    def system_attrs(self):
        # type: () -> Dict[str, Any]
        return self.storage.study_system_attrs

    @property
    def dense_accuracy(self):
        # type: () -> float
        """Accuracy on the user classes after dense fine-tuning."""
        attrs = self.system_attrs
        if 'dense_acc_uc' not in attrs:
            raise ValueError('The dense model has not been fine-tuned yet.')
        return attrs['dense_acc_uc']

    @property
    def padded_masks(self):
        # type: () -> List[np.ndarray]
        """Block-aligned masks the pruner works on, one per layer."""
        if self._padded_masks is None:
            self._padded_masks = [pad_to_blocks(np.ones(layer.shape, dtype=bool), self.schedule.b)[0]
                                  for layer in self.model.layers_]
        return self._padded_masks

    def set_system_attr(self, key, value):
        # type: (str, Any) -> None
        self.storage.set_study_system_attr(key, value)

    def _train_kwargs(self):
        m = self.model
        return dict(lr=m.lr, momentum=m.momentum, weight_decay=m.weight_decay, batch_size=m.batch_size)

    def _accuracy(self):
        # type: () -> float
        return evaluate(self.model, self.dataset.X_test, self.dataset.y_test, self.profile.u_c,
                        restrict=self.restrict)

    def fine_tune_dense(self):
        # type: () -> float
        """Fine-tune the unpruned model on the user classes; returns its accuracy."""
        for layer in self.model.layers_:
            layer.mask[...] = True
        self._padded_masks = None
        if self.dense_epochs > 0:
            fine_tune(self.model, self.dataset, self.profile.u_c, self.dense_epochs, seed=self.seed,
                      **self._train_kwargs())
        acc = self._accuracy()
        self.set_system_attr('dense_acc_uc', acc)
        self.logger.info('Dense model accuracy on classes {}: {:.4f}.'.format(list(self.profile.u_c), acc))
        return acc

    def optimize(self, show_progress_bar=False, catch=()):
        # type: (bool, Tuple[type, ...]) -> None
        """Run every iteration of the schedule.

        Args:
            show_progress_bar:
                Show a tqdm bar over iterations.
            catch:
                Exception types recorded as a FAIL iteration without stopping.
                Any other error is recorded and re-raised.
        """
        if 'dense_acc_uc' not in self.system_attrs:
            self.fine_tune_dense()
        start = self.storage.get_n_iterations(basic.IterationState.COMPLETE) + 1
        for p in tqdm(range(start, self.schedule.iterations + 1), disable=not show_progress_bar):
            self._run_iteration(p, catch)

    def _run_iteration(self, p, catch):
        # type: (int, Tuple[type, ...]) -> Optional[basic.IterationRecord]
        kappa = next_kappa(p, self.schedule)
        index = self.storage.create_new_iteration(kappa)
        try:
            record = self._prune_step(p, kappa, index)
        except catch as e:
            message = 'Setting status of iteration#{} as {} because of the following error: {}'.format(
                p, basic.IterationState.FAIL, repr(e))
            self.logger.warning(message)
            self.storage.set_iteration_state(index, basic.IterationState.FAIL)
            self.storage.set_iteration_system_attr(index, 'fail_reason', message)
            return None
        except Exception as e:
            self.storage.set_iteration_state(index, basic.IterationState.FAIL)
            self.storage.set_iteration_system_attr(index, 'fail_reason', repr(e))
            self.logger.error('Iteration#{} failed: {}'.format(p, e))
            raise
        self.storage.set_iteration_state(index, basic.IterationState.COMPLETE)
        return record

    def _prune_step(self, p, kappa, index):
        # type: (int, float, int) -> basic.IterationRecord
        nm, b = self.schedule.nm, self.schedule.b
        model, kwargs = self.model, self._train_kwargs()

        X_h, y_h = sample_per_class(self.dataset.X_train, self.dataset.y_train, self.profile, self.seed + p)
        train(model, X_h, y_h, self.schedule.saliency_epochs, seed=self.seed + p, **kwargs)
        grads, h = accumulate_class_gradients(model, self.profile, self.dataset, seed=self.seed + p,
                                              batch_size=kwargs['batch_size'])

        grids, masks, ranked = [], [], []
        for l, (layer, grad) in enumerate(zip(model.layers_, grads)):
            saliency, _ = pad_to_blocks(class_saliency(layer.weights, grad, h), b)
            real, _ = pad_to_blocks(np.ones(layer.shape, dtype=bool), b)
            kept_blocks = block_keep_flags(self.padded_masks[l], b)
            mask = nm_project(saliency, nm, kept_blocks, b, valid=real)
            grid = row_sort(block_scores(saliency, mask, b))
            ranks = column_aggregate(grid, l, kept_mask=mask)
            scores = [r.score for r in ranks]
            if any(x > y for x, y in zip(scores, scores[1:])):
                raise basic.InvariantError('Layer {} rank scores are not nondecreasing.'.format(l))
            grids.append(grid)
            masks.append(mask)
            ranked.append(ranks)

        counts = select_prune_set(global_rank(ranked), self.layer_stats, kappa, nm, self.pruned_ranks,
                                  kept_weights=[int(mask.sum()) for mask in masks])
        new_masks = [apply_block_prune(mask, grid, c) for mask, grid, c in zip(masks, grids, counts)]
        self._check_masks(new_masks)
        self._padded_masks = new_masks
        self.pruned_ranks = counts
        for layer, mask in zip(model.layers_, new_masks):
            layer.mask[...] = mask[:layer.shape[0], :layer.shape[1]]

        if self.schedule.fine_tune_epochs > 0:
            loss = fine_tune(model, self.dataset, self.profile.u_c, self.schedule.fine_tune_epochs,
                             seed=self.seed + p, **kwargs)
        else:
            X_uc, y_uc = class_subset(self.dataset.X_train, self.dataset.y_train, self.profile.u_c)
            loss = cross_entropy(forward(model, X_uc)[0], y_uc)
        acc = self._accuracy()
        measured = model.sparsity()
        per_layer = [layer.sparsity() for layer in model.layers_]

        self.storage.set_iteration_result(index, measured, loss, acc, per_layer, counts)
        self.storage.set_iteration_system_attr(index, 'saliency_samples', h)
        self.logger.info('Iteration#{}: kappa {:.4f}, sparsity {:.4f}, loss {:.4f}, acc_uc {:.4f}.'.format(
            p, kappa, measured, loss, acc))
        return self.storage.get_iteration(index)

    def _check_masks(self, new_masks):
        # type: (List[np.ndarray]) -> None
        nm, b = self.schedule.nm, self.schedule.b
        for l, (old, new) in enumerate(zip(self.padded_masks, new_masks)):
            report = validate_pattern(new, nm, b)
            if not report.ok:
                raise basic.InvariantError('Layer {} breaks the hybrid pattern: {}'.format(l, report.summary()))
            if np.any(block_keep_flags(new, b) & ~block_keep_flags(old, b)):
                raise basic.InvariantError('Layer {} revived a pruned block.'.format(l))

    def iterations_dataframe(self):
        # type: () -> pd.DataFrame
        """Completed iterations as a pandas DataFrame_ with the CSV report columns.

        .. _DataFrame: http://pandas.pydata.org/pandas-docs/stable/generated/pandas.DataFrame.html
        """
        return self.storage.to_dataframe()

    def compressed_layers(self):
        # type: () -> List[Tuple[HybridSparseMatrix, basic.Padding]]
        """Every layer encoded in the hybrid format, with its padding record."""
        out = []
        for layer, mask in zip(self.model.layers_, self.padded_masks):
            weights, padding = pad_to_blocks(layer.weights, self.schedule.b)
            out.append((encode(weights, mask, self.schedule.nm, self.schedule.b), padding))
        return out

    def decompressed_weights(self):
        # type: () -> List[np.ndarray]
        return [unpad_blocks(decode(h), padding) for h, padding in self.compressed_layers()]


def get_storage(storage):
    # type: (Optional[Storage]) -> Storage

    if storage is None:
        return Storage()
    return storage


def create_study(model, dataset, schedule, profile, storage=None, study_name=None, seed=0,
                 dense_epochs=DEFAULT_DENSE_EPOCHS, restrict=False):
    # type: (MicroModel, SynthDataset, PruneSchedule, UserProfile, Optional[Storage], Optional[str], int, int, bool) -> PruneStudy
    """Create a new :class:`PruneStudy` working on a copy of ``model``.

    Args:
        model:
            A fitted :class:`~crisp.micronet.model.MicroModel`; it is copied,
            the original stays dense.
        dataset:
            Data the model was trained on.
        schedule:
            :class:`~crisp.pruner.schedule.PruneSchedule`.
        profile:
            :class:`~crisp.micronet.data.UserProfile`.
        storage:
            In-memory storage; a new one is created when ``None``.
        study_name:
            Study's name. A unique name is generated when ``None``.

    Returns:
        A :class:`PruneStudy` object.
    """
    check_is_fitted(model, 'layers_')
    profile.check(model.n_classes_)
    if dataset.n_classes != model.n_classes_:
        raise basic.ArgumentError('Dataset has {} classes, model {}.'.format(dataset.n_classes, model.n_classes_))
    storage = get_storage(storage)
    if study_name is not None:
        storage.study_name = study_name
    study = PruneStudy(storage.study_name, storage, model.clone_fitted(), dataset, schedule, profile,
                       seed=seed, dense_epochs=dense_epochs, restrict=restrict)
    study.set_system_attr('schedule', schedule.to_dict())
    study.set_system_attr('u_c', list(profile.u_c))
    return study


def prune_model(model, dataset, schedule, profile, seed=0, dense_epochs=DEFAULT_DENSE_EPOCHS, restrict=False,
                show_progress_bar=False):
    # type: (MicroModel, SynthDataset, PruneSchedule, UserProfile, int, int, bool, bool) -> Tuple[MicroModel, pd.DataFrame]
    """Prune a copy of ``model`` to ``schedule.kappa_target`` for the classes in ``profile``.

    Returns:
        The pruned model and the per-iteration report.

    Raises:
        ScheduleError: the target sparsity cannot be reached.
        DivergenceError: training produced a non-finite loss.
        InvariantError: a mask broke the hybrid pattern or revived a block.
    """
    study = create_study(model, dataset, schedule, profile, seed=seed, dense_epochs=dense_epochs,
                         restrict=restrict)
    study.optimize(show_progress_bar=show_progress_bar)
    return study.model, study.iterations_dataframe()
