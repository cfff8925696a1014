"""Encoder plugins loaded by the tests."""
