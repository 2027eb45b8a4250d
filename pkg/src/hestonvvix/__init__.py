"""Theoretical VVIX under the Heston model."""
