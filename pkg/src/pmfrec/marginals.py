"""Pairwise marginal estimation from samples with missing entries.

Each pair of variables is estimated from the samples where both are
observed, normalising by the co-observation count. Pairs with too few
co-observations are left out of the available set entirely.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .errors import EmptyPairSetError
from .model import FactorModel, SampleTable


@dataclass(frozen=True)
class PairwiseSet:
    """Estimated pairwise marginals over the available pairs.

    ``entries`` maps ordered pairs ``(j, k)`` with ``j < k`` to an
    ``I_j x I_k`` frequency matrix; ``co_counts`` records how many samples
    co-observed each stored pair. A pair is stored iff its co-count reaches
    ``min_count``.
    """

    alphabet_sizes: tuple[int, ...]
    entries: dict[tuple[int, int], np.ndarray]
    co_counts: dict[tuple[int, int], int]
    min_count: int = 1

    @property
    def num_vars(self) -> int:
        return len(self.alphabet_sizes)

    def pairs(self) -> Iterator[tuple[int, int]]:
        return iter(sorted(self.entries))

    def get(self, j: int, k: int) -> np.ndarray:
        """Marginal for (j, k) in that orientation, transposing if needed."""
        if j < k:
            return self.entries[(j, k)]
        return self.entries[(k, j)].T

    def has(self, j: int, k: int) -> bool:
        return (min(j, k), max(j, k)) in self.entries

    def neighbors(self, k: int) -> list[int]:
        """Variables that share a stored pair with ``k``."""
        out = [b for (a, b) in self.entries if a == k]
        out += [a for (a, b) in self.entries if b == k]
        return sorted(out)


def estimate_pairwise(data: SampleTable, min_count: int = 1) -> PairwiseSet:
    """Co-occurrence frequency estimates for every sufficiently observed pair."""
    if data.num_samples < 1:
        raise ValueError("need at least one sample")
    cells = data.cells
    sizes = data.alphabet_sizes
    observed = cells > 0
    entries: dict[tuple[int, int], np.ndarray] = {}
    counts: dict[tuple[int, int], int] = {}
    for j in range(data.num_vars):
        for k in range(j + 1, data.num_vars):
            both = observed[:, j] & observed[:, k]
            n_jk = int(both.sum())
            if n_jk < max(min_count, 1):
                continue
            flat = (cells[both, j] - 1) * sizes[k] + (cells[both, k] - 1)
            hist = np.bincount(flat, minlength=sizes[j] * sizes[k])
            mat = hist.reshape(sizes[j], sizes[k]).astype(float) / n_jk
            mat.flags.writeable = False
            entries[(j, k)] = mat
            counts[(j, k)] = n_jk
    return PairwiseSet(tuple(sizes), entries, counts, min_count=max(min_count, 1))


def exact_pairwise(model: FactorModel) -> PairwiseSet:
    """Noise-free pairwise marginals computed directly from a model.

    Useful for recoverability experiments; co-counts are recorded as 0 with
    ``min_count`` 0 since no samples back these matrices.
    """
    from .model import pairwise_from_model

    entries: dict[tuple[int, int], np.ndarray] = {}
    counts: dict[tuple[int, int], int] = {}
    for j in range(model.num_vars):
        for k in range(j + 1, model.num_vars):
            mat = pairwise_from_model(model, j, k)
            mat.flags.writeable = False
            entries[(j, k)] = mat
            counts[(j, k)] = 0
    return PairwiseSet(tuple(model.alphabet_sizes), entries, counts, min_count=0)


def column_mass_floor(pairs: PairwiseSet) -> float:
    """Smallest column l1 mass across all stored pairwise matrices."""
    if not pairs.entries:
        raise EmptyPairSetError("no pairwise marginals available")
    return float(min(mat.sum(axis=0).min() for mat in pairs.entries.values()))
