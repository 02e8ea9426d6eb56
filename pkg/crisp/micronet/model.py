#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
crisp/micronet/model.py was created on 2024/04/19.
file in :relativeFile
"""
from typing import Any
from typing import Dict
from typing import List
from typing import NamedTuple
from typing import Optional
from typing import Tuple

import numpy as np
from scipy.special import logsumexp, softmax
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from crisp.basic import ArgumentError, ConfigError, DimensionError, DivergenceError
from crisp.core import container
from crisp.core.tensor import apply_mask


class ModelConfig(NamedTuple):
    """Architecture and optimizer settings of a :class:`MicroModel`."""
    hidden: Tuple[int, ...] = (128, 128)
    lr: float = 0.01
    momentum: float = 0.9
    weight_decay: float = 4e-5
    batch_size: int = 32
    epochs: int = 20

    @classmethod
    def from_dict(cls, d):
        # type: (Dict[str, Any]) -> ModelConfig
        unknown = set(d) - set(cls._fields)
        if unknown:
            raise ConfigError('Unknown model keys: {}.'.format(', '.join(sorted(unknown))))
        d = {k: v if k == 'hidden' else cls.__annotations__[k](v) for k, v in d.items()}
        if 'hidden' in d:
            d['hidden'] = tuple(int(h) for h in d['hidden'])
        return cls(**d)

    def estimator_params(self):
        # type: () -> Dict[str, Any]
        return self._asdict()


class Layer(object):
    """Fully connected layer ``act(x (W*M)^T + bias)`` with an S x K weight matrix."""

    def __init__(self, weights, bias, mask=None, activation='relu'):
        # type: (np.ndarray, np.ndarray, Optional[np.ndarray], str) -> None
        if activation not in ('relu', 'identity'):
            raise ArgumentError('Unknown activation {!r}.'.format(activation))
        self.weights = np.array(weights, dtype=np.float64)
        self.bias = np.array(bias, dtype=np.float64)
        self.mask = np.ones(self.weights.shape, dtype=bool) if mask is None else np.array(mask, dtype=bool)
        self.activation = activation
        if self.mask.shape != self.weights.shape or self.bias.shape != (self.weights.shape[0],):
            raise DimensionError('Layer with weights {} got mask {} and bias {}.'.format(
                self.weights.shape, self.mask.shape, self.bias.shape))

    @property
    def shape(self):
        return self.weights.shape

    def effective_weights(self):
        # type: () -> np.ndarray
        return apply_mask(self.weights, self.mask)

    def sparsity(self):
        # type: () -> float
        return 1.0 - self.mask.sum() / self.mask.size

    def copy(self):
        # type: () -> Layer
        return Layer(self.weights, self.bias, self.mask, self.activation)


class MicroModel(BaseEstimator, ClassifierMixin):
    """Multi-layer perceptron trained with masked SGD and a straight-through backward.

    ReLU hidden layers, identity output layer, softmax cross-entropy loss.
    Masks act in the forward pass only, so every weight keeps a dense
    gradient and pruned weights can come back.

    Args:
        hidden:
            Widths of the hidden layers.
        lr, momentum, weight_decay, batch_size, epochs:
            SGD settings used by :meth:`fit`.
        random_state:
            Seed of weight init and shuffling.
        restrict_to_classes:
            When set, predictions take the argmax over these classes only.
    """

    def __init__(self, hidden=(128, 128), lr=0.01, momentum=0.9, weight_decay=4e-5, batch_size=32,
                 epochs=20, random_state=0, restrict_to_classes=None):
        self.hidden = hidden
        self.lr = lr
        self.momentum = momentum
        self.weight_decay = weight_decay
        self.batch_size = batch_size
        self.epochs = epochs
        self.random_state = random_state
        self.restrict_to_classes = restrict_to_classes

    def init_layers(self, n_features, n_classes):
        # type: (int, int) -> MicroModel
        """He-initialised layers, zero biases, full masks."""
        rng = np.random.RandomState(self.random_state)
        widths = [int(n_features)] + [int(h) for h in self.hidden] + [int(n_classes)]
        self.layers_ = []  # type: List[Layer]
        for i, (k, s) in enumerate(zip(widths[:-1], widths[1:])):
            w = rng.normal(scale=np.sqrt(2.0 / k), size=(s, k))
            activation = 'identity' if i == len(widths) - 2 else 'relu'
            self.layers_.append(Layer(w, np.zeros(s), activation=activation))
        self.n_classes_ = int(n_classes)
        self.classes_ = np.arange(self.n_classes_)
        self.loss_curve_ = []  # type: List[float]
        return self

    def fit(self, X, y, n_classes=None):
        from crisp.micronet.train import train

        X, y = check_X_y(X, y, dtype=np.float64)
        n_classes = int(y.max()) + 1 if n_classes is None else n_classes
        self.init_layers(X.shape[1], n_classes)
        return train(self, X, y, epochs=self.epochs, lr=self.lr, momentum=self.momentum,
                     weight_decay=self.weight_decay, batch_size=self.batch_size, seed=self.random_state)

    def decision_function(self, X):
        check_is_fitted(self, 'layers_')
        X = check_array(X, dtype=np.float64)
        return forward(self, X)[0]

    def predict_proba(self, X):
        return softmax(self.decision_function(X), axis=1)

    def predict(self, X):
        logits = self.decision_function(X)
        if self.restrict_to_classes is not None:
            allowed = np.zeros(logits.shape[1], dtype=bool)
            allowed[list(self.restrict_to_classes)] = True
            logits = np.where(allowed, logits, -np.inf)
        return np.argmax(logits, axis=1)

    def sparsity(self):
        # type: () -> float
        """Fraction of masked weights over every layer."""
        total = sum(layer.mask.size for layer in self.layers_)
        kept = sum(int(layer.mask.sum()) for layer in self.layers_)
        return 1.0 - kept / total if total else 0.0

    def clone_fitted(self):
        # type: () -> MicroModel
        """Copy of this fitted model with independent layer arrays."""
        other = MicroModel(**self.get_params())
        other.layers_ = [layer.copy() for layer in self.layers_]
        other.n_classes_ = self.n_classes_
        other.classes_ = self.classes_.copy()
        other.loss_curve_ = list(self.loss_curve_)
        return other


def forward(model, X):
    # type: (MicroModel, np.ndarray) -> Tuple[np.ndarray, List[Tuple[np.ndarray, np.ndarray]]]
    """Logits of ``X`` and the per-layer ``(input, pre-activation)`` cache."""
    x = np.asarray(X, dtype=np.float64)
    cache = []
    for layer in model.layers_:
        if x.ndim != 2 or x.shape[1] != layer.shape[1]:
            raise DimensionError('Layer expects {} inputs, got shape {}.'.format(layer.shape[1], x.shape))
        z = np.dot(x, layer.effective_weights().T) + layer.bias
        cache.append((x, z))
        x = np.maximum(z, 0.0) if layer.activation == 'relu' else z
    return x, cache


def cross_entropy(logits, y):
    # type: (np.ndarray, np.ndarray) -> float
    return float(np.mean(logsumexp(logits, axis=1) - logits[np.arange(len(y)), y]))


def loss_and_backward(model, X, y):
    # type: (MicroModel, np.ndarray, np.ndarray) -> Tuple[float, List[Tuple[np.ndarray, np.ndarray]]]
    """Mean softmax cross-entropy and dense ``(dW, db)`` for every layer.

    ``dW`` is taken with respect to ``W * M`` and handed to ``W`` unchanged,
    so masked positions get the gradient they would have if their value
    were zero but trainable.
    """
    y = np.asarray(y, dtype=np.int64)
    if y.ndim != 1 or len(y) != len(X):
        raise DimensionError('Got {} labels for {} samples.'.format(y.shape, len(X)))
    if len(y) and (y.min() < 0 or y.max() >= model.n_classes_):
        raise ArgumentError('Labels must lie in [0, {}).'.format(model.n_classes_))
    logits, cache = forward(model, X)
    loss = cross_entropy(logits, y)
    if not np.isfinite(loss):
        raise DivergenceError('Loss is {}.'.format(loss))

    delta = softmax(logits, axis=1)
    delta[np.arange(len(y)), y] -= 1.0
    delta /= len(y)

    grads = []
    for layer, (x, z) in zip(reversed(model.layers_), reversed(cache)):
        if layer.activation == 'relu':
            delta = delta * (z > 0)
        grads.append((delta.T.dot(x), delta.sum(axis=0)))
        delta = delta.dot(layer.effective_weights())
    grads.reverse()
    return loss, grads


def save_model(path, model):
    # type: (str, MicroModel) -> None
    arrays = []
    for i, layer in enumerate(model.layers_):
        arrays += [('weights_{}'.format(i), layer.weights), ('bias_{}'.format(i), layer.bias),
                   ('mask_{}'.format(i), layer.mask)]
    params = model.get_params()
    params['hidden'] = list(params['hidden'])
    if params['restrict_to_classes'] is not None:
        params['restrict_to_classes'] = [int(c) for c in params['restrict_to_classes']]
    container.save(path, 'model', arrays, {
        'activations': [layer.activation for layer in model.layers_],
        'n_classes': model.n_classes_,
        'params': params,
    })


def load_model(path):
    # type: (str) -> MicroModel
    arrays, meta = container.load(path, 'model')
    params = dict(meta['params'])
    params['hidden'] = tuple(params['hidden'])
    model = MicroModel(**params)
    model.layers_ = [
        Layer(arrays['weights_{}'.format(i)], arrays['bias_{}'.format(i)], arrays['mask_{}'.format(i)],
              activation)
        for i, activation in enumerate(meta['activations'])]
    model.n_classes_ = int(meta['n_classes'])
    model.classes_ = np.arange(model.n_classes_)
    model.loss_curve_ = []
    return model
