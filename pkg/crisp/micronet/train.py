#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
crisp/micronet/train.py was created on 2024/04/22.
file in :relativeFile
"""
from typing import List
from typing import Sequence
from typing import Tuple

import numpy as np
import pandas as pd
from sklearn.metrics import accuracy_score

from crisp.basic import ArgumentError
from crisp.depens import logging
from crisp.micronet.data import UserProfile, SynthDataset, class_subset, sample_per_class
from crisp.micronet.model import MicroModel, loss_and_backward

_logger = logging.get_logger(__name__)


def _batches(n, batch_size, rng=None):
    order = np.arange(n) if rng is None else rng.permutation(n)
    for start in range(0, n, batch_size):
        yield order[start:start + batch_size]


def train(model, X, y, epochs, lr=0.01, momentum=0.9, weight_decay=4e-5, batch_size=32, seed=0):
    # type: (MicroModel, np.ndarray, np.ndarray, int, float, float, float, int, int) -> MicroModel
    """SGD with momentum on the dense weights; masks act in the forward pass only.

    Per step ``v = momentum * v + (g + weight_decay * W)`` and ``W -= lr * v``
    (biases are not decayed). The mean loss of every epoch is appended to
    ``model.loss_curve_``.

    Raises:
        DivergenceError: the loss became NaN or Inf.
    """
    if epochs < 1:
        raise ArgumentError('epochs must be >= 1, got {}.'.format(epochs))
    if batch_size < 1:
        raise ArgumentError('batch_size must be >= 1, got {}.'.format(batch_size))
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if len(X) == 0:
        raise ArgumentError('Cannot train on an empty sample set.')
    rng = np.random.RandomState(seed)
    velocity = [(np.zeros_like(layer.weights), np.zeros_like(layer.bias)) for layer in model.layers_]

    for epoch in range(epochs):
        total = 0.0
        for batch in _batches(len(X), batch_size, rng):
            loss, grads = loss_and_backward(model, X[batch], y[batch])
            total += loss * len(batch)
            for layer, (vw, vb), (dw, db) in zip(model.layers_, velocity, grads):
                vw *= momentum
                vw += dw + weight_decay * layer.weights
                vb *= momentum
                vb += db
                layer.weights -= lr * vw
                layer.bias -= lr * vb
        model.loss_curve_.append(total / len(X))
        _logger.debug('epoch {}: loss {:.6f}'.format(epoch + 1, model.loss_curve_[-1]))

    _logger.info('Trained {} epochs on {} samples, final loss {:.4f}.'.format(
        epochs, len(X), model.loss_curve_[-1]))
    return model


def fine_tune(model, dataset, classes, epochs, lr=0.01, momentum=0.9, weight_decay=4e-5, batch_size=32,
              seed=0):
    # type: (MicroModel, SynthDataset, Sequence[int], int, float, float, float, int, int) -> float
    """Train on the training samples of ``classes``; returns the last epoch's loss."""
    X, y = class_subset(dataset.X_train, dataset.y_train, classes)
    train(model, X, y, epochs, lr, momentum, weight_decay, batch_size, seed)
    return model.loss_curve_[-1]


def accumulate_class_gradients(model, profile, dataset, seed=0, batch_size=32, epochs=1):
    # type: (MicroModel, UserProfile, SynthDataset, int, int, int) -> Tuple[List[np.ndarray], int]
    """Sum of per-sample weight gradients over samples of the user classes.

    ``profile.h_per_class`` training samples of every class in ``u_c`` are
    drawn once and visited ``epochs`` times without updating the model.

    Returns:
        Per-layer gradient sums and the number of samples ``H`` they cover
        (``|u_c| * h_per_class * epochs``).
    """
    profile.check(model.n_classes_)
    X, y = sample_per_class(dataset.X_train, dataset.y_train, profile, seed)
    accum = [np.zeros_like(layer.weights) for layer in model.layers_]
    for _ in range(epochs):
        for batch in _batches(len(X), batch_size):
            _, grads = loss_and_backward(model, X[batch], y[batch])
            for acc, (dw, _) in zip(accum, grads):
                acc += dw * len(batch)
    return accum, len(X) * epochs


def evaluate(model, X, y, u_c, restrict=False):
    # type: (MicroModel, np.ndarray, np.ndarray, Sequence[int], bool) -> float
    """Accuracy on the samples whose label is in ``u_c``.

    The argmax runs over every class unless ``restrict`` limits it to ``u_c``.
    Ties go to the lowest class id.
    """
    if not len(u_c):
        raise ArgumentError('u_c must not be empty.')
    X_uc, y_uc = class_subset(np.asarray(X), np.asarray(y), u_c)
    if len(y_uc) == 0:
        raise ArgumentError('No test samples belong to classes {}.'.format(list(u_c)))
    restrict_before = model.restrict_to_classes
    model.restrict_to_classes = list(u_c) if restrict else None
    try:
        predicted = model.predict(X_uc)
    finally:
        model.restrict_to_classes = restrict_before
    return float(accuracy_score(y_uc, predicted))


def curve_dataframe(model):
    # type: (MicroModel) -> pd.DataFrame
    return pd.DataFrame({'epoch': np.arange(1, len(model.loss_curve_) + 1), 'loss': model.loss_curve_},
                        columns=['epoch', 'loss'])
