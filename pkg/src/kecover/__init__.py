"""Kahler-Einstein criteria for Galois covers of Fano manifolds, with numerical checks on P^1."""

__version__ = "0.1.0"
