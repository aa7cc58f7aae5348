"""Numerical tolerances shared across the package."""

from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    predicate: float = 1e-9         # unitarity / hermiticity / positivity / TP checks
    reconstruction: float = 1e-8    # Schmidt reconstruction, Choi round trips
    clamp: float = 1e-10            # singular values / eigenvalues treated as zero
    degeneracy: float = 1e-7        # Schmidt coefficients closer than this are degenerate
    entangled: float = 1e-7         # concurrence above this refuses a product decomposition


DEFAULT = Tolerances()
