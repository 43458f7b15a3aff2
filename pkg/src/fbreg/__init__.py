"""Free boundary regularity laboratory for a semilinear vector-valued obstacle-type system."""

__version__ = "0.1.0"
