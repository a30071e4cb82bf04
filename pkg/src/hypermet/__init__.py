"""Finite-sample tools for sphericalization, Gromov hyperbolicity, visual boundary metrics and quasihyperbolic geometry of domains."""

__version__ = "0.1.0"
