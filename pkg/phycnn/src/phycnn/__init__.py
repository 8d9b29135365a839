"""phycnn: physics-informed CNN permeability predictor.

Consumes the dataset artifacts of the labeling pipeline -- a manifest
CSV plus 1-bit raw voxel files -- purely through their on-disk formats;
there is no code dependency on the producer package.
"""

__version__ = "0.1.0"
