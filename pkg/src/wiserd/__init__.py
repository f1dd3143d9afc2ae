"""Computational companion for the rapid-decay geometry of Wise's group."""
__version__ = "0.1.0"
