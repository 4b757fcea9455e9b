"""Non-overlapping Schwarz methods in time for parabolic optimal control."""

__version__ = "0.1.0"
