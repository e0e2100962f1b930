"""
services contains the HTTP API serving exported replay results
"""

from .fluentnet_api import app

__all__ = ["app"]
