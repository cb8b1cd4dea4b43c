"""Shipped configuration data."""
