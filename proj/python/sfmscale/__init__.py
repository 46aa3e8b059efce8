"""Metric scale recovery and depth reprojection for SfM reconstructions."""

from ._core import *  # noqa: F401,F403
from ._core import SfmscaleError, __doc__  # noqa: F401

__version__ = "0.1.0"
