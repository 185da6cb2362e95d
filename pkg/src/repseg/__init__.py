"""Repetition segmentation and counting for skeletal exercise recordings."""

__version__ = "0.1.0"
