"""Unit test package for photon-window."""
