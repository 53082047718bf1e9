"""Homological monodromy of rational pencils F**p / G**q on the projective plane."""

__version__ = "0.1.0"
