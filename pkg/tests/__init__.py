"""Tests package for edgewatch."""
