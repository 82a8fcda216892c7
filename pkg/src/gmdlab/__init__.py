"""Desk-scale toolkit for generalized max-dicut and graph pricing experiments."""

__version__ = "0.1.0"
