"""REBA ergonomic scoring and temporal action segmentation."""

from ergoseg._ergoseg import *  # noqa: F401,F403
from ergoseg._ergoseg import __doc__  # noqa: F401

__version__ = "0.1.0"
