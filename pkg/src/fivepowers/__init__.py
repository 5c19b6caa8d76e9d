"""Computational tools for (x-d)^5 + x^5 + (x+d)^5 = z^n with d = 2^a 5^b."""

__version__ = "0.1.0"
