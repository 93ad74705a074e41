"""Planar harmonic mappings: critical sets, caustics, pre-image counting."""
