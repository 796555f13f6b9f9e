"""Compatible unitarity pairs: channel unitarity, CUP-sets and their estimation."""

__version__ = "0.1.0"
