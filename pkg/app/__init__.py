"""
SmoothCert: certified robustness by randomized smoothing with learned
simplex maps.
"""

__version__ = "1.0.0"
