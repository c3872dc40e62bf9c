"""p-variation norms of partial sums of orthonormal systems."""

__version__ = "0.1.0"
