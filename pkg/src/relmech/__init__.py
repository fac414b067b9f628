"""Special-relativistic mechanics, electromagnetism, linearised gravity and fluids."""

__version__ = "0.1.0"
