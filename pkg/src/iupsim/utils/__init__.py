"""Utility modules for iupsim."""
