#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
crisp/__init__.py was created on 2024/03/06.
file in :relativeFile
"""
__version__ = '0.1.0'

from crisp.basic import NmConfig  # NOQA
from crisp.basic import parse_nm  # NOQA
from crisp.micronet import MicroModel  # NOQA
from crisp.micronet import UserProfile  # NOQA
from crisp.micronet import gen_synthetic  # NOQA
from crisp.pruner import PruneSchedule  # NOQA
from crisp.sparse import HybridSparseMatrix  # NOQA
from crisp.sparse import decode  # NOQA
from crisp.sparse import encode  # NOQA
from crisp.study import PruneStudy  # NOQA
from crisp.study import create_study  # NOQA
from crisp.study import prune_model  # NOQA
