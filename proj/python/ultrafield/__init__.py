"""Gaussian random fields on ultrametric ball trees."""

from ._ultrafield import *  # noqa: F401,F403
from ._ultrafield import UltrafieldError, __doc__  # noqa: F401

__version__ = "0.1.0"
