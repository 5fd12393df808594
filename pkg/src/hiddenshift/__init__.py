"""Hidden shift algorithms for quadratic Boolean functions, simulated exactly."""

__version__ = "0.1.0"
