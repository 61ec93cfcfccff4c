"""Unit tests package for iupsim."""
