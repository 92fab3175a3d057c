"""Tests for the control landscape explorer."""
