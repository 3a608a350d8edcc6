"""Confluence prover for first-order term rewrite systems based on decreasing diagrams."""

__version__ = "0.1.0"
