"""Numerical experiments for the heat equation driven by eps^(3/4) g(u) times the gradient of mollified white noise."""

__version__ = "0.1.0"
