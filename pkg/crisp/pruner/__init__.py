#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
crisp/pruner/__init__.py was created on 2024/04/12.
file in :relativeFile
"""
from crisp.pruner.saliency import BlockScoreGrid  # NOQA
from crisp.pruner.saliency import apply_block_prune  # NOQA
from crisp.pruner.saliency import block_scores  # NOQA
from crisp.pruner.saliency import class_saliency  # NOQA
from crisp.pruner.saliency import column_aggregate  # NOQA
from crisp.pruner.saliency import global_rank  # NOQA
from crisp.pruner.saliency import layer_stats  # NOQA
from crisp.pruner.saliency import nm_project  # NOQA
from crisp.pruner.saliency import row_sort  # NOQA
from crisp.pruner.saliency import select_prune_set  # NOQA
from crisp.pruner.schedule import PruneSchedule  # NOQA
from crisp.pruner.schedule import next_kappa  # NOQA
