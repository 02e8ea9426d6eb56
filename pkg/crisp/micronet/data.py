#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
crisp/micronet/data.py was created on 2024/04/18.
file in :relativeFile

Synthetic Gaussian-cluster classification task and user class profiles.
"""
from typing import Any
from typing import Dict
from typing import NamedTuple
from typing import Sequence
from typing import Tuple

import numpy as np
from sklearn.model_selection import train_test_split

from crisp.basic import ArgumentError, ConfigError
from crisp.core import container


class SynthConfig(NamedTuple):
    classes: int = 10
    dim: int = 64
    per_class: int = 500
    scale: float = 0.3
    test_size: float = 0.2

    @classmethod
    def from_dict(cls, d):
        # type: (Dict[str, Any]) -> SynthConfig
        unknown = set(d) - set(cls._fields)
        if unknown:
            raise ConfigError('Unknown data keys: {}.'.format(', '.join(sorted(unknown))))
        return cls(**{k: cls.__annotations__[k](v) for k, v in d.items()})


class SynthDataset(NamedTuple):
    """Train/test split of the synthetic task.

    Attributes:
        X_train, y_train, X_test, y_test:
            Samples (float64, ``n x dim``) and labels (int64 in ``[0, C)``).
        means:
            ``C x dim`` unit-norm class means.
        n_classes:
            Number of classes ``C``.
        seed:
            Generator seed.
    """
    X_train: np.ndarray
    y_train: np.ndarray
    X_test: np.ndarray
    y_test: np.ndarray
    means: np.ndarray
    n_classes: int
    seed: int

    @property
    def dim(self):
        # type: () -> int
        return self.X_train.shape[1]


class _UserProfile(NamedTuple):
    u_c: Tuple[int, ...]
    h_per_class: int


class UserProfile(_UserProfile):
    """User-preferred classes ``u_c`` and the samples drawn per class for saliency."""

    def __new__(cls, u_c, h_per_class=32):
        classes = tuple(sorted(set(int(c) for c in u_c)))
        if not classes:
            raise ArgumentError('A user profile needs at least one class.')
        if classes[0] < 0:
            raise ArgumentError('Class ids must be >= 0, got {}.'.format(classes[0]))
        if h_per_class < 1:
            raise ArgumentError('h_per_class must be >= 1, got {}.'.format(h_per_class))
        return super(UserProfile, cls).__new__(cls, classes, int(h_per_class))

    @classmethod
    def from_dict(cls, d):
        # type: (Dict[str, Any]) -> UserProfile
        unknown = set(d) - set(cls._fields)
        if unknown:
            raise ConfigError('Unknown profile keys: {}.'.format(', '.join(sorted(unknown))))
        if 'u_c' not in d:
            raise ConfigError('Profile needs "u_c".')
        return cls(**d)

    def check(self, n_classes):
        # type: (int) -> None
        if self.u_c[-1] >= n_classes:
            raise ArgumentError('Class {} is outside [0, {}).'.format(self.u_c[-1], n_classes))


def parse_classes(text):
    # type: (str) -> Tuple[int, ...]
    """``"1,4,7"`` -> ``(1, 4, 7)``."""
    try:
        return tuple(int(c) for c in text.split(',') if c.strip())
    except ValueError:
        raise ArgumentError('Classes must be comma separated integers, got {!r}.'.format(text))


def class_means(classes, dim, rng):
    # type: (int, int, np.random.RandomState) -> np.ndarray
    """Unit-norm means: a randomly rotated regular simplex when it fits in ``dim``."""
    if classes <= dim:
        simplex = np.eye(classes) - 1.0 / classes
        simplex /= np.linalg.norm(simplex, axis=1, keepdims=True)
        means = np.zeros((classes, dim))
        means[:, :classes] = simplex
        rotation, _ = np.linalg.qr(rng.standard_normal((dim, dim)))
        return means.dot(rotation.T)
    means = rng.standard_normal((classes, dim))
    return means / np.linalg.norm(means, axis=1, keepdims=True)


def gen_synthetic(classes=10, dim=64, per_class=500, seed=0, scale=0.3, test_size=0.2):
    # type: (int, int, int, int, float, float) -> SynthDataset
    """Gaussian clusters around well separated means, split with stratification.

    Every class gets ``per_class`` samples ``mean + N(0, scale^2 I)``; the
    split keeps the class histogram equal in train and test.
    """
    if classes < 2 or dim < 2:
        raise ArgumentError('Need classes >= 2 and dim >= 2, got {} and {}.'.format(classes, dim))
    if per_class * test_size < 1 or per_class * (1 - test_size) < 1:
        raise ArgumentError('per_class={} is too small for a {:.0%} test split.'.format(per_class, test_size))
    rng = np.random.RandomState(seed)
    means = class_means(classes, dim, rng)
    X = np.repeat(means, per_class, axis=0) + rng.normal(scale=scale, size=(classes * per_class, dim))
    y = np.repeat(np.arange(classes, dtype=np.int64), per_class)
    X_train, X_test, y_train, y_test = train_test_split(
        X, y, test_size=test_size, stratify=y, random_state=seed)
    return SynthDataset(X_train, y_train, X_test, y_test, means, classes, seed)


def class_subset(X, y, classes):
    # type: (np.ndarray, np.ndarray, Sequence[int]) -> Tuple[np.ndarray, np.ndarray]
    keep = np.isin(y, list(classes))
    return X[keep], y[keep]


def sample_per_class(X, y, profile, seed=0):
    # type: (np.ndarray, np.ndarray, UserProfile, int) -> Tuple[np.ndarray, np.ndarray]
    """``h_per_class`` samples of every class in ``profile.u_c``, class by class."""
    rng = np.random.RandomState(seed)
    picked = []
    for c in profile.u_c:
        idx = np.flatnonzero(y == c)
        if idx.size < profile.h_per_class:
            raise ArgumentError('Class {} has {} samples, {} needed.'.format(c, idx.size, profile.h_per_class))
        picked.append(np.sort(rng.choice(idx, profile.h_per_class, replace=False)))
    picked = np.concatenate(picked)
    return X[picked], y[picked]


def save_dataset(path, ds):
    # type: (str, SynthDataset) -> None
    container.save(path, 'dataset', [
        ('X_train', ds.X_train), ('y_train', ds.y_train),
        ('X_test', ds.X_test), ('y_test', ds.y_test), ('means', ds.means),
    ], {'n_classes': ds.n_classes, 'seed': ds.seed})


def load_dataset(path):
    # type: (str) -> SynthDataset
    arrays, meta = container.load(path, 'dataset')
    return SynthDataset(
        arrays['X_train'], arrays['y_train'].astype(np.int64), arrays['X_test'],
        arrays['y_test'].astype(np.int64), arrays['means'], int(meta['n_classes']), int(meta['seed']))
