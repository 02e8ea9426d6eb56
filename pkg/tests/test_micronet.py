#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
tests/test_micronet.py was created on 2024/04/23.
file in :relativeFile
"""
import math
import os
import tempfile
import unittest

import numpy as np
from numpy.testing import assert_allclose, assert_array_equal

from crisp.basic import ArgumentError, ConfigError, DivergenceError
from crisp.core.tensor import matmul_dense
from crisp.micronet.data import (SynthConfig, UserProfile, class_subset, gen_synthetic, load_dataset,
                                 parse_classes, sample_per_class, save_dataset)
from crisp.micronet.model import (Layer, MicroModel, ModelConfig, cross_entropy, forward, load_model,
                                  loss_and_backward, save_model)
from crisp.micronet.train import accumulate_class_gradients, evaluate, train


def _small_model(seed, n_features=5, hidden=(6,), n_classes=3):
    model = MicroModel(hidden=hidden, random_state=seed).init_layers(n_features, n_classes)
    rng = np.random.RandomState(seed + 100)
    for layer in model.layers_:
        layer.bias = rng.normal(scale=0.1, size=layer.bias.shape)
    return model


def _linear_model(weights, bias=None):
    weights = np.asarray(weights, dtype=float)
    model = MicroModel(hidden=()).init_layers(weights.shape[1], weights.shape[0])
    model.layers_[0].weights = weights.copy()
    if bias is not None:
        model.layers_[0].bias = np.asarray(bias, dtype=float)
    return model


class TestSynthetic(unittest.TestCase):

    def test_deterministic(self):
        a, b = gen_synthetic(classes=4, dim=8, per_class=50, seed=3), gen_synthetic(classes=4, dim=8, per_class=50,
                                                                                    seed=3)
        assert_array_equal(a.X_train, b.X_train)
        assert_array_equal(a.y_test, b.y_test)

    def test_balanced(self):
        ds = gen_synthetic(seed=0)
        assert_array_equal(np.bincount(ds.y_train), [400] * 10)
        assert_array_equal(np.bincount(ds.y_test), [100] * 10)
        assert_allclose(np.linalg.norm(ds.means, axis=1), 1.0)
        self.assertEqual(ds.dim, 64)

    def test_two_classes_separable(self):
        ds = gen_synthetic(classes=2, dim=8, per_class=500, seed=0)
        model = MicroModel(hidden=(16,), epochs=20, random_state=0).fit(ds.X_train, ds.y_train)
        self.assertGreaterEqual(model.score(ds.X_test, ds.y_test), 0.99)

    def test_save_load(self):
        ds = gen_synthetic(classes=3, dim=4, per_class=20, seed=1)
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, 'dataset.bin')
            save_dataset(path, ds)
            back = load_dataset(path)
        assert_array_equal(back.X_train, ds.X_train)
        assert_array_equal(back.y_test, ds.y_test)
        self.assertEqual((back.n_classes, back.seed), (3, 1))

    def test_bad_sizes(self):
        with self.assertRaises(ArgumentError):
            gen_synthetic(classes=1)
        with self.assertRaises(ArgumentError):
            gen_synthetic(per_class=2, test_size=0.2)


class TestProfile(unittest.TestCase):

    def test_sorted_unique(self):
        self.assertEqual(UserProfile([7, 1, 4, 1]).u_c, (1, 4, 7))
        self.assertEqual(parse_classes('1,4, 7'), (1, 4, 7))

    def test_rejected(self):
        with self.assertRaises(ArgumentError):
            UserProfile([])
        with self.assertRaises(ArgumentError):
            UserProfile([1], h_per_class=0)
        with self.assertRaises(ArgumentError):
            UserProfile([3]).check(3)
        with self.assertRaises(ArgumentError):
            parse_classes('1,a')
        with self.assertRaises(ConfigError):
            UserProfile.from_dict({'u_c': [1], 'extra': 2})
        with self.assertRaises(ConfigError):
            ModelConfig.from_dict({'depth': 3})
        with self.assertRaises(ValueError):
            SynthConfig.from_dict({'classes': 'ten'})
        self.assertEqual(ModelConfig.from_dict({'hidden': [8], 'lr': '0.5'}), ModelConfig(hidden=(8,), lr=0.5))

    def test_sample_per_class(self):
        ds = gen_synthetic(classes=4, dim=8, per_class=50, seed=2)
        X, y = sample_per_class(ds.X_train, ds.y_train, UserProfile([0, 3], h_per_class=7), seed=1)
        self.assertEqual(len(X), 14)
        assert_array_equal(np.bincount(y, minlength=4), [7, 0, 0, 7])
        with self.assertRaises(ArgumentError):
            sample_per_class(ds.X_train, ds.y_train, UserProfile([0], h_per_class=1000))


class TestForward(unittest.TestCase):

    def test_single_linear_layer(self):
        rng = np.random.RandomState(0)
        model = _linear_model(rng.standard_normal((3, 4)), rng.standard_normal(3))
        X = rng.standard_normal((5, 4))
        logits, _ = forward(model, X)
        layer = model.layers_[0]
        assert_allclose(logits, matmul_dense(X, layer.weights) + layer.bias, rtol=1e-12, atol=1e-12)

    def test_zero_mask_gives_bias(self):
        model = _linear_model(np.ones((3, 4)), [0.5, -1.0, 2.0])
        model.layers_[0].mask[...] = False
        logits, _ = forward(model, np.ones((2, 4)))
        assert_array_equal(logits, [[0.5, -1.0, 2.0]] * 2)

    def test_two_layers_recomputed(self):
        model = _small_model(1)
        X = np.random.RandomState(2).standard_normal((4, 5))
        hidden = np.maximum(X.dot(model.layers_[0].effective_weights().T) + model.layers_[0].bias, 0)
        expected = hidden.dot(model.layers_[1].effective_weights().T) + model.layers_[1].bias
        assert_allclose(forward(model, X)[0], expected, rtol=1e-12, atol=1e-12)

    def test_dimension_mismatch(self):
        with self.assertRaises(ValueError):
            forward(_small_model(0), np.ones((2, 3)))


class TestBackward(unittest.TestCase):

    def test_uniform_logits(self):
        model = _linear_model(np.zeros((10, 4)))
        loss, _ = loss_and_backward(model, np.ones((6, 4)), np.arange(6))
        self.assertAlmostEqual(loss, math.log(10), places=12)

    def test_finite_differences(self):
        step = 1e-6
        for seed in (0, 1, 2):
            model = _small_model(seed)
            rng = np.random.RandomState(seed)
            X, y = rng.standard_normal((8, 5)), rng.randint(0, 3, size=8)
            _, grads = loss_and_backward(model, X, y)

            def loss_at():
                return cross_entropy(forward(model, X)[0], y)

            for layer, (dw, db) in zip(model.layers_, grads):
                for param, grad in ((layer.weights, dw), (layer.bias, db)):
                    for idx in np.ndindex(*param.shape):
                        saved = param[idx]
                        param[idx] = saved + step
                        up = loss_at()
                        param[idx] = saved - step
                        down = loss_at()
                        param[idx] = saved
                        numeric = (up - down) / (2 * step)
                        error = abs(numeric - grad[idx]) / max(abs(numeric), abs(grad[idx]), 1e-4)
                        self.assertLessEqual(error, 1e-5, 'seed {} index {}'.format(seed, idx))

    def test_straight_through(self):
        model = _small_model(3)
        rng = np.random.RandomState(3)
        for layer in model.layers_:
            layer.mask = rng.random_sample(layer.shape) < 0.5
        X, y = rng.standard_normal((8, 5)), rng.randint(0, 3, size=8)
        loss, grads = loss_and_backward(model, X, y)

        dense = model.clone_fitted()
        for layer in dense.layers_:
            layer.weights = layer.effective_weights()
            layer.mask[...] = True
        dense_loss, dense_grads = loss_and_backward(dense, X, y)
        self.assertEqual(loss, dense_loss)
        for (dw, db), (ew, eb) in zip(grads, dense_grads):
            assert_array_equal(dw, ew)
            assert_array_equal(db, eb)
        self.assertTrue(np.any(grads[0][0][~model.layers_[0].mask] != 0))

    def test_divergence(self):
        model = _linear_model(np.full((2, 2), 1e308))
        with np.errstate(all='ignore'):
            with self.assertRaises(DivergenceError):
                loss_and_backward(model, np.array([[1e10, -1e10]]), np.array([0]))

    def test_bad_labels(self):
        with self.assertRaises(ArgumentError):
            loss_and_backward(_small_model(0), np.ones((1, 5)), np.array([3]))


class TestTrain(unittest.TestCase):

    def test_zero_lr(self):
        ds = gen_synthetic(classes=3, dim=5, per_class=20, seed=0)
        model = _small_model(0)
        before = [layer.weights.copy() for layer in model.layers_]
        train(model, ds.X_train, ds.y_train, epochs=2, lr=0.0)
        for layer, w in zip(model.layers_, before):
            assert_array_equal(layer.weights, w)

    def test_loss_decreases(self):
        ds = gen_synthetic(classes=2, dim=8, per_class=100, seed=4)
        model = MicroModel(hidden=(8,), epochs=10, random_state=4).fit(ds.X_train, ds.y_train)
        self.assertLess(model.loss_curve_[-1], model.loss_curve_[0])
        self.assertEqual(len(model.loss_curve_), 10)

    def test_defaults(self):
        model = MicroModel()
        self.assertEqual((model.momentum, model.weight_decay), (0.9, 4e-5))

    def test_pruned_weights_stay_masked(self):
        ds = gen_synthetic(classes=3, dim=5, per_class=20, seed=0)
        model = _small_model(0)
        model.layers_[0].mask[:, :2] = False
        train(model, ds.X_train, ds.y_train, epochs=1)
        self.assertTrue(np.all(model.layers_[0].effective_weights()[:, :2] == 0))

    def test_rejected(self):
        with self.assertRaises(ArgumentError):
            train(_small_model(0), np.ones((2, 5)), np.zeros(2), epochs=0)
        with self.assertRaises(ArgumentError):
            train(_small_model(0), np.ones((0, 5)), np.zeros(0), epochs=1)


class TestClassGradients(unittest.TestCase):

    def test_all_classes_is_average_gradient(self):
        ds = gen_synthetic(classes=3, dim=5, per_class=40, seed=5)
        model = _small_model(5)
        profile = UserProfile([0, 1, 2], h_per_class=10)
        accum, h = accumulate_class_gradients(model, profile, ds, seed=9, batch_size=7)
        self.assertEqual(h, 30)
        X, y = sample_per_class(ds.X_train, ds.y_train, profile, seed=9)
        _, grads = loss_and_backward(model, X, y)
        for acc, (dw, _) in zip(accum, grads):
            assert_allclose(acc / h, dw, rtol=1e-10, atol=1e-14)

    def test_epochs_scale_h(self):
        ds = gen_synthetic(classes=3, dim=5, per_class=40, seed=5)
        _, h = accumulate_class_gradients(_small_model(5), UserProfile([1], h_per_class=4), ds, epochs=3)
        self.assertEqual(h, 12)

    def test_profiles_rank_differently(self):
        # output row c only sees input feature c
        model = MicroModel(hidden=()).init_layers(3, 3)
        model.layers_[0].weights = np.eye(3)
        X = np.eye(3)[np.repeat(np.arange(3), 40)] + 0.01
        y = np.repeat(np.arange(3), 40)
        ds = gen_synthetic(classes=3, dim=3, per_class=50, seed=0)._replace(X_train=X, y_train=y)
        orders = []
        for c in (0, 2):
            accum, h = accumulate_class_gradients(model, UserProfile([c], h_per_class=20), ds)
            saliency = np.abs(accum[0] / h * model.layers_[0].weights)
            orders.append(np.argsort(-saliency.ravel(), kind='stable')[0])
        self.assertNotEqual(orders[0], orders[1])


class TestEvaluate(unittest.TestCase):

    def test_perfect(self):
        X, y = np.eye(4)[[0, 1, 2, 3, 1]], np.array([0, 1, 2, 3, 1])
        self.assertEqual(evaluate(_linear_model(np.eye(4)), X, y, [1, 3]), 1.0)

    def test_constant_logits_tie_rule(self):
        model = _linear_model(np.zeros((10, 4)))
        X, y = np.ones((20, 4)), np.repeat(np.arange(10), 2)
        self.assertEqual(evaluate(model, X, y, [0]), 1.0)
        self.assertEqual(evaluate(model, X, y, [1]), 0.0)
        self.assertEqual(evaluate(model, X, y, [1], restrict=True), 1.0)
        self.assertIsNone(model.restrict_to_classes)

    def test_all_classes_is_accuracy(self):
        ds = gen_synthetic(classes=3, dim=5, per_class=30, seed=6)
        model = _small_model(6)
        self.assertEqual(evaluate(model, ds.X_test, ds.y_test, [0, 1, 2]), model.score(ds.X_test, ds.y_test))

    def test_no_samples(self):
        with self.assertRaises(ArgumentError):
            evaluate(_linear_model(np.eye(2)), np.eye(2), np.array([0, 0]), [1])
        with self.assertRaises(ArgumentError):
            evaluate(_linear_model(np.eye(2)), np.eye(2), np.array([0, 1]), [])


class TestModelFile(unittest.TestCase):

    def test_round_trip(self):
        model = _small_model(7)
        model.layers_[1].mask[0, :3] = False
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, 'model.bin')
            save_model(path, model)
            back = load_model(path)
        X = np.random.RandomState(7).standard_normal((4, 5))
        assert_array_equal(back.decision_function(X), model.decision_function(X))
        assert_array_equal(back.layers_[1].mask, model.layers_[1].mask)
        self.assertEqual(back.get_params(), model.get_params())

    def test_layer_shapes_checked(self):
        with self.assertRaises(ValueError):
            Layer(np.ones((2, 3)), np.zeros(3))
        with self.assertRaises(ArgumentError):
            Layer(np.ones((2, 3)), np.zeros(2), activation='tanh')


if __name__ == '__main__':
    unittest.main()
