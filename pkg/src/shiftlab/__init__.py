"""Finite-stage workbench for shift endomorphisms of the hyperfinite II_1 factor."""

__version__ = "0.1.0"
