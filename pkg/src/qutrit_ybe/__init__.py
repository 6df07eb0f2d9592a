"""Turnover identities and Trotter-circuit compression for spin-1 qutrit chains."""

__version__ = "0.1.0"
