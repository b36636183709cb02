"""Test package for unit and integration tests."""
