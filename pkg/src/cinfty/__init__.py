"""cinfty: a small computer-algebra kernel for finitely presented C-infinity rings."""

__version__ = "0.1.0"
