"""Certified packing and Hausdorff measures of self-similar sets."""

__version__ = "0.1.0"
