"""Intensity noise and photon statistics of single-mode lasers from the rate equations."""

__version__ = "0.1.0"
