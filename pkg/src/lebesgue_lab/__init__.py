"""Numerical companion to Lebesgue's covering theorem: decompositions, witnesses and sphere configurations."""

__version__ = "0.1.0"
