"""Reflection positivity checks for Gaussian and perturbed lattice measures."""

from ._core import *  # noqa: F401,F403
from ._core import __version__  # noqa: F401
