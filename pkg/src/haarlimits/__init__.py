"""Weingarten calculus on O(N) and U(N), HCIZ expansions and large-N universality checks."""

__version__ = "0.1.0"
