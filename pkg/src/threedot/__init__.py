"""Multifold-mixing laboratory for 3-dot type systems."""
