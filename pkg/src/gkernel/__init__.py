"""Exact homological algebra for group cohomology with rational-type coefficients."""

__version__ = "0.1.0"
