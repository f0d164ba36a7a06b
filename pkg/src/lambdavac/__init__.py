"""Exact vacuum solutions with a cosmological constant: symbolic curvature and grid analyses."""
