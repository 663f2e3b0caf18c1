"""Resonance-band laboratory for convex obstacles."""
