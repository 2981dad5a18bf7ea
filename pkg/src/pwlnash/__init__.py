﻿# encoding: utf-8-sig

"""
Certified approximate Nash equilibria of integer programming games with
piecewise-linear cost approximations.
"""

__version__ = "0.1.0"
