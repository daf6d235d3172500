"""Exact super-linear algebra for Schur-Weyl style dualities and Kimura-finite cycle models."""

__version__ = "0.1.0"
