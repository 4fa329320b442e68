"""Toolkit for the linking-number formulation of the spanning problem for
surfaces: exterior algebra, finite differential chains, norms, exact
linking numbers, cubical spanning certification, measure diagnostics,
surgeries, and a spanning-preserving minimizer."""

__version__ = "0.1.0"
