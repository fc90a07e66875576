"""Test suite for networked-learning."""
