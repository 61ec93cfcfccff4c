"""Integration tests package for iupsim."""
