"""Distributions of compound sums with random summation boundaries."""

__version__ = "0.1.0"
