"""Unit tests for services."""
