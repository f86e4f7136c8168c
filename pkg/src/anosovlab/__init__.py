"""anosovlab: a desk-scale laboratory for flows built from dominated
linear dynamics on user-supplied generator matrices."""

__version__ = "0.1.0"
