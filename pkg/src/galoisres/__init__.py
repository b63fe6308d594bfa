"""Homological metrics for modules over finite metric posets."""

__version__ = "0.1.0"
