"""Specification-based testing for contract-annotated ``.wys`` programs."""

__version__ = "0.1.0"
