"""Class-aware evaluation of monocular metric depth estimation."""
__version__ = "1.0.0"
