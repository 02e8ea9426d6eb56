#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
depens/logging.py was created on 2024/03/21.
file in :relativeFile
"""

from __future__ import absolute_import

import colorlog
import logging
from logging import CRITICAL  # NOQA
from logging import DEBUG  # NOQA
from logging import ERROR  # NOQA
from logging import INFO  # NOQA
from logging import WARNING  # NOQA
import threading
from typing import Optional  # NOQA

_lock = threading.Lock()
_default_handler = None  # type: Optional[logging.Handler]


def create_default_formatter():
    # type: () -> colorlog.ColoredFormatter
    """Formatter of crisp's console output: ``[I 2024-03-21 10:00:00,000] message``."""

    return colorlog.ColoredFormatter(
        '%(log_color)s[%(levelname)1.1s %(asctime)s]%(reset)s %(message)s')


def _get_library_name():
    # type: () -> str

    return __name__.split('.')[0]


def _get_library_root_logger():
    # type: () -> logging.Logger

    return logging.getLogger(_get_library_name())


def _configure_library_root_logger():
    # type: () -> None

    global _default_handler

    with _lock:
        if _default_handler:
            return
        _default_handler = logging.StreamHandler()
        _default_handler.setFormatter(create_default_formatter())

        # A configured python root logger already collects our records.
        if logging.getLogger().handlers:
            return

        library_root_logger = _get_library_root_logger()
        library_root_logger.addHandler(_default_handler)
        library_root_logger.setLevel(logging.INFO)


def get_logger(name):
    # type: (str) -> logging.Logger
    """Return a logger below the ``crisp`` root logger."""

    _configure_library_root_logger()
    return logging.getLogger(name)


def get_verbosity():
    # type: () -> int
    """Return the level of crisp's root logger, e.g. ``crisp.depens.logging.INFO``."""

    _configure_library_root_logger()
    return _get_library_root_logger().getEffectiveLevel()


def set_verbosity(verbosity):
    # type: (int) -> None
    """Set the level of crisp's root logger.

    Args:
        verbosity:
            Logging level, e.g. ``crisp.depens.logging.DEBUG``. The CLI maps
            ``--verbose`` to DEBUG and ``--quiet`` to WARNING.
    """

    _configure_library_root_logger()
    _get_library_root_logger().setLevel(verbosity)


def disable_default_handler():
    # type: () -> None
    """Stop writing crisp's records to stderr (records still propagate)."""

    _configure_library_root_logger()

    assert _default_handler is not None
    _get_library_root_logger().removeHandler(_default_handler)


def enable_default_handler():
    # type: () -> None
    """Undo :func:`disable_default_handler`."""

    _configure_library_root_logger()

    assert _default_handler is not None
    _get_library_root_logger().addHandler(_default_handler)
