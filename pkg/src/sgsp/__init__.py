"""Specification property for C0-semigroups: constructions and numerical probes."""

__version__ = "0.1.0"
