#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
crisp/sparse/__init__.py was created on 2024/03/25.
file in :relativeFile
"""
from crisp.sparse.hybrid import HybridSparseMatrix  # NOQA
from crisp.sparse.hybrid import block_keep_flags  # NOQA
from crisp.sparse.hybrid import check_well_formed  # NOQA
from crisp.sparse.hybrid import decode  # NOQA
from crisp.sparse.hybrid import encode  # NOQA
from crisp.sparse.hybrid import random_hybrid_mask  # NOQA
from crisp.sparse.hybrid import validate_pattern  # NOQA
from crisp.sparse.kernel import effectual_mac_count  # NOQA
from crisp.sparse.kernel import spmm  # NOQA
from crisp.sparse.metadata import metadata_bits_crisp  # NOQA
from crisp.sparse.metadata import metadata_bits_csr  # NOQA
from crisp.sparse.metadata import metadata_bits_ellpack  # NOQA
from crisp.sparse.metadata import metadata_report  # NOQA
from crisp.sparse.metadata import overall_sparsity  # NOQA
from crisp.sparse.serialize import deserialize  # NOQA
from crisp.sparse.serialize import serialize  # NOQA
