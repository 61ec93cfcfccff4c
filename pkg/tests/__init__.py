"""Tests package for iupsim."""
