"""Tests for the tourplanner package."""
