"""Permutation-aligned error metrics between factor models."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import AlphabetMismatchError
from .model import DEFAULT_CELL_BUDGET, FactorModel, reconstruct_joint


@dataclass(frozen=True)
class Alignment:
    """Common column permutation matching one model's components to another's.

    ``permutation[f]`` is the estimate column assigned to reference
    component ``f``; ``cost`` is the total squared error under that match.
    """

    permutation: tuple[int, ...]
    cost: float

    def __post_init__(self):
        if sorted(self.permutation) != list(range(len(self.permutation))):
            raise ValueError("permutation must be a bijection")


def _check_shapes(a: FactorModel, b: FactorModel) -> None:
    if a.rank != b.rank or a.alphabet_sizes != b.alphabet_sizes:
        raise AlphabetMismatchError(
            f"models have shapes {a.alphabet_sizes}/rank {a.rank} "
            f"vs {b.alphabet_sizes}/rank {b.rank}"
        )


def align(reference: FactorModel, estimate: FactorModel) -> Alignment:
    """Exact minimum-cost matching of components, shared by all factors.

    The cost of pairing reference component ``f`` with estimate component
    ``g`` sums the squared column distances over every factor plus the
    squared prior difference.
    """
    _check_shapes(reference, estimate)
    rank = reference.rank
    costs = np.zeros((rank, rank))
    for a, b in zip(reference.factors, estimate.factors):
        diff = a[:, :, None] - b[:, None, :]
        costs += np.einsum("ifg,ifg->fg", diff, diff)
    costs += (reference.prior[:, None] - estimate.prior[None, :]) ** 2
    rows, cols = linear_sum_assignment(costs)
    perm = np.empty(rank, dtype=int)
    perm[rows] = cols
    return Alignment(tuple(int(g) for g in perm), float(costs[rows, cols].sum()))


def mse(reference: FactorModel, estimate: FactorModel) -> float:
    """Aligned squared error averaged over the factor blocks and the prior."""
    a = align(reference, estimate)
    denom = reference.rank * (reference.num_vars + 1)
    return a.cost / denom


def mre(
    reference: FactorModel,
    estimate: FactorModel,
    cell_budget: int = DEFAULT_CELL_BUDGET,
) -> float:
    """Relative l1 distance between the dense joint tables.

    The joint table is invariant to the common column permutation, so no
    explicit alignment is needed; the configured cell budget caps the size
    of the tables this will materialise.
    """
    _check_shapes(reference, estimate)
    truth = reconstruct_joint(reference, cell_budget).values
    guess = reconstruct_joint(estimate, cell_budget).values
    return float(np.abs(guess - truth).sum() / np.abs(truth).sum())


def rating_errors(truth: Sequence[float], pred: Sequence[float]) -> tuple[float, float]:
    """Root-mean-square and mean-absolute error of predicted ratings."""
    t = np.asarray(truth, dtype=float)
    p = np.asarray(pred, dtype=float)
    if t.shape != p.shape or t.ndim != 1:
        raise ValueError("truth and predictions must be equal-length vectors")
    if t.size == 0:
        raise ValueError("need at least one rating")
    diff = p - t
    return float(np.sqrt(np.mean(diff**2))), float(np.mean(np.abs(diff)))
