"""Tests for receptorlab."""
