"""Small numerical helpers used across modules."""

from __future__ import annotations

import numpy as np

# Probability floor applied before logs and inside ratios so that exact
# zeros produced by fitting never poison downstream computations.
PROB_FLOOR = 1e-12


def as_rng(seed) -> np.random.Generator:
    """Coerce an int seed, Generator, or None into a Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def floored_log(x: np.ndarray, floor: float = PROB_FLOOR) -> np.ndarray:
    """Elementwise log with values clipped up to ``floor`` first."""
    return np.log(np.maximum(x, floor))


def l1_normalize_columns(a: np.ndarray) -> np.ndarray:
    """Rescale each column to unit l1 mass; all-zero columns become uniform."""
    a = np.asarray(a, dtype=float)
    sums = a.sum(axis=0)
    out = np.empty_like(a)
    zero = sums <= 0.0
    if np.any(zero):
        out[:, zero] = 1.0 / a.shape[0]
    nz = ~zero
    out[:, nz] = a[:, nz] / sums[nz]
    return out


def uniform_simplex(rng: np.random.Generator, size: int) -> np.ndarray:
    """Draw one point uniformly at random from the probability simplex."""
    return rng.dirichlet(np.ones(size))
