"""Structured signaling games, sRSA and efficiency analysis in the color domain."""
__version__ = "0.1.0"
