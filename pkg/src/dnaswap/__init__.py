"""State-vector model of DNA base pairing as entanglement swapping."""

__version__ = "0.1.0"
