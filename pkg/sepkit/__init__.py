#
# Copyright (c) 2025, sepkit developers
#
# SPDX-License-Identifier: BSD 2-Clause License
#

"""Separatrices of holomorphic flows ż = f(z)."""

__version__ = "0.1.0"
