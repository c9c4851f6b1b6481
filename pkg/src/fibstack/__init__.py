"""Finite fibred categories, sites, sheaves and stacks."""
