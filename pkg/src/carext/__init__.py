"""Certified enclosures of boundary extensions of conformal maps."""

__version__ = "0.1.0"
