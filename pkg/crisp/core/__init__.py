#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
crisp/core/__init__.py was created on 2024/03/06.
file in :relativeFile
"""
from crisp.core.storage import InMemoryStorage as Storage
from crisp.core.tensor import (apply_mask, as_dense, as_mask, matmul_dense, pad_to_blocks,
                               reshape_conv_weight, unpad_blocks, unreshape_conv_weight)
