"""rockperm: permeability labeling pipeline for binary pore-space images."""

__version__ = "0.1.0"
