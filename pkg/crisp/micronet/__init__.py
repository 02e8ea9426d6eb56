#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
crisp/micronet/__init__.py was created on 2024/04/18.
file in :relativeFile
"""
from crisp.micronet.data import SynthConfig  # NOQA
from crisp.micronet.data import SynthDataset  # NOQA
from crisp.micronet.data import UserProfile  # NOQA
from crisp.micronet.data import gen_synthetic  # NOQA
from crisp.micronet.model import Layer  # NOQA
from crisp.micronet.model import MicroModel  # NOQA
from crisp.micronet.model import ModelConfig  # NOQA
from crisp.micronet.model import forward  # NOQA
from crisp.micronet.model import loss_and_backward  # NOQA
from crisp.micronet.train import accumulate_class_gradients  # NOQA
from crisp.micronet.train import evaluate  # NOQA
from crisp.micronet.train import train  # NOQA
