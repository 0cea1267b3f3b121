"""CR-flatness verification for Levi degenerate hypersurfaces in C^3."""

__version__ = "0.1.0"
