"""Newton polytopes, affine-arclength weights and flow-map jets for
multilinear Radon-type forms built from polynomial submersions."""

__version__ = "0.1.0"
