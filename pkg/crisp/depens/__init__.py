#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
crisp/depens/__init__.py was created on 2024/03/06.
file in :relativeFile
"""
