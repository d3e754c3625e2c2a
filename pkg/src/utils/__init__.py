"""Utility modules for input documents and run bookkeeping."""
