"""Finite polar spaces, their Grassmann graphs, apartments and isometric embeddings."""

__version__ = "0.1.0"
