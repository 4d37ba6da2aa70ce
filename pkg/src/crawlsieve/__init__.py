"""Separate mechanical from human access patterns in web-server logs."""

__version__ = "0.1.0"
