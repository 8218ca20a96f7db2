"""
Common utilities shared by the mxqueue services.
"""

# This file makes 'common' a Python package
from .errors import MxQueueError

__all__ = ["MxQueueError"]
