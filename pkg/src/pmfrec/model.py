"""Latent naive-Bayes factor model: exact reconstruction and conditional inference.

The joint PMF of ``N`` discrete variables is represented as a mixture over a
latent component ``f``: each variable ``n`` has a conditional PMF matrix whose
column ``f`` is the distribution of that variable given the component, and the
mixture weights form the prior. All probability tensors derived here follow
row-major layout with the last variable's index varying fastest.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce
from typing import Mapping, Sequence

import numpy as np
from scipy.special import logsumexp

from .errors import AlphabetMismatchError, CellBudgetError, DegenerateEvidenceError
from .util import floored_log

# Largest dense joint table materialised by default (number of cells).
DEFAULT_CELL_BUDGET = 10**7

# Column-stochastic and simplex checks allow this much accumulated rounding.
_SUM_TOL = 1e-9

MISSING = 0  # code used in sample tables for an unobserved cell


def _freeze(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=float, copy=True)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class FactorModel:
    """Conditional PMF matrices plus the latent prior.

    Attributes:
        alphabet_sizes: per-variable alphabet sizes ``I_1..I_N``.
        rank: number of latent components ``F``.
        factors: one ``I_n x F`` column-stochastic matrix per variable.
        prior: length-``F`` probability vector over components.
    """

    alphabet_sizes: tuple[int, ...]
    rank: int
    factors: tuple[np.ndarray, ...]
    prior: np.ndarray

    def __init__(self, factors: Sequence[np.ndarray], prior: np.ndarray):
        factors = tuple(_freeze(np.atleast_2d(a)) for a in factors)
        prior = _freeze(np.ravel(prior))
        object.__setattr__(self, "factors", factors)
        object.__setattr__(self, "prior", prior)
        object.__setattr__(self, "rank", prior.shape[0])
        object.__setattr__(
            self, "alphabet_sizes", tuple(int(a.shape[0]) for a in factors)
        )
        self._validate()

    def _validate(self) -> None:
        if self.rank < 1:
            raise ValueError("model needs at least one latent component")
        if not self.factors:
            raise ValueError("model needs at least one variable")
        if not np.all(np.isfinite(self.prior)):
            raise ValueError("prior has non-finite entries")
        if np.any(self.prior < 0) or np.any(self.prior > 1):
            raise ValueError("prior entries must lie in [0, 1]")
        if abs(self.prior.sum() - 1.0) > _SUM_TOL:
            raise ValueError(f"prior sums to {self.prior.sum()!r}, not 1")
        for n, a in enumerate(self.factors):
            if a.ndim != 2 or a.shape[1] != self.rank:
                raise ValueError(f"factor {n} must have {self.rank} columns")
            if not np.all(np.isfinite(a)):
                raise ValueError(f"factor {n} has non-finite entries")
            if np.any(a < 0) or np.any(a > 1):
                raise ValueError(f"factor {n} has entries outside [0, 1]")
            colsums = a.sum(axis=0)
            if np.max(np.abs(colsums - 1.0)) > _SUM_TOL:
                raise ValueError(f"factor {n} columns must each sum to 1")

    @property
    def num_vars(self) -> int:
        return len(self.factors)

    def permuted(self, perm: Sequence[int]) -> "FactorModel":
        """Apply one common column permutation to every factor and the prior."""
        perm = np.asarray(perm, dtype=int)
        if sorted(perm.tolist()) != list(range(self.rank)):
            raise ValueError("perm must be a permutation of the component indices")
        return FactorModel([a[:, perm] for a in self.factors], self.prior[perm])

    def check_data(self, data: "SampleTable") -> None:
        """Raise if a sample table disagrees with this model's alphabets."""
        if data.num_vars != self.num_vars or tuple(data.alphabet_sizes) != tuple(
            self.alphabet_sizes
        ):
            raise AlphabetMismatchError(
                f"model alphabets {self.alphabet_sizes} do not match "
                f"data alphabets {tuple(data.alphabet_sizes)}"
            )


@dataclass(frozen=True)
class SampleTable:
    """Categorical observations with explicit missingness.

    ``cells`` is an ``S x N`` integer table; entry values are 1-based codes,
    with 0 marking a missing cell.
    """

    cells: np.ndarray
    alphabet_sizes: tuple[int, ...]

    def __init__(self, cells: np.ndarray, alphabet_sizes: Sequence[int]):
        cells = np.array(cells, dtype=np.int64, copy=True)
        if cells.ndim != 2:
            raise ValueError("cells must be a 2-d table")
        alphabet_sizes = tuple(int(i) for i in alphabet_sizes)
        if len(alphabet_sizes) != cells.shape[1]:
            raise ValueError("one alphabet size required per column")
        if any(i < 1 for i in alphabet_sizes):
            raise ValueError("alphabet sizes must be positive")
        for n, size in enumerate(alphabet_sizes):
            col = cells[:, n]
            if col.min(initial=0) < 0 or col.max(initial=0) > size:
                raise ValueError(
                    f"column {n} holds codes outside 0..{size} (0 means missing)"
                )
        cells.flags.writeable = False
        object.__setattr__(self, "cells", cells)
        object.__setattr__(self, "alphabet_sizes", alphabet_sizes)

    @property
    def num_samples(self) -> int:
        return int(self.cells.shape[0])

    @property
    def num_vars(self) -> int:
        return int(self.cells.shape[1])


@dataclass(frozen=True)
class JointPmf:
    """Dense joint probability table over all variables."""

    alphabet_sizes: tuple[int, ...]
    values: np.ndarray = field(repr=False)

    def __init__(self, values: np.ndarray):
        values = _freeze(values)
        if np.any(values < 0):
            raise ValueError("joint probabilities must be nonnegative")
        if abs(values.sum() - 1.0) > _SUM_TOL:
            raise ValueError("joint probabilities must sum to 1")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "alphabet_sizes", tuple(values.shape))


def reconstruct_joint(
    model: FactorModel, cell_budget: int = DEFAULT_CELL_BUDGET
) -> JointPmf:
    """Assemble the dense joint PMF implied by the model.

    Refuses to materialise tables larger than ``cell_budget`` cells.
    """
    required = int(np.prod([float(i) for i in model.alphabet_sizes]))
    if required > cell_budget:
        raise CellBudgetError(required, cell_budget)
    acc = np.zeros(model.alphabet_sizes)
    for f in range(model.rank):
        cols = [a[:, f] for a in model.factors]
        acc += model.prior[f] * reduce(np.multiply.outer, cols)
    return JointPmf(acc)


def pairwise_from_model(model: FactorModel, j: int, k: int) -> np.ndarray:
    """Exact pairwise marginal of variables ``j`` and ``k`` under the model."""
    if j == k:
        raise ValueError("pairwise marginal needs two distinct variables")
    return (model.factors[j] * model.prior) @ model.factors[k].T


def conditional_target_dist(
    model: FactorModel, target: int, evidence: Mapping[int, int]
) -> np.ndarray:
    """Posterior distribution of the target variable given observed codes.

    ``evidence`` maps variable indices to 1-based codes. Variables absent
    from the evidence are marginalised out implicitly: their column sums are
    1, so they drop from the mixture weights. Work happens in the log domain
    and never touches the dense joint table.
    """
    if target in evidence:
        raise ValueError("evidence must not include the target variable")
    if not 0 <= target < model.num_vars:
        raise ValueError(f"target index {target} out of range")
    logw = floored_log(model.prior).copy()
    for n, code in evidence.items():
        if not 0 <= n < model.num_vars:
            raise ValueError(f"evidence variable {n} out of range")
        if not 1 <= code <= model.alphabet_sizes[n]:
            raise ValueError(f"code {code} invalid for variable {n}")
        logw += floored_log(model.factors[n][code - 1])
    logp = logsumexp(logw[None, :] + floored_log(model.factors[target]), axis=1)
    norm = logsumexp(logp)
    if not np.isfinite(norm):
        # Unreachable once probabilities are floored; kept as a hard guard.
        raise DegenerateEvidenceError("evidence has zero probability under the model")
    return np.exp(logp - norm)


def predict_map(model: FactorModel, target: int, evidence: Mapping[int, int]) -> int:
    """Most probable code for the target; ties break to the smallest code."""
    dist = conditional_target_dist(model, target, evidence)
    return int(np.argmax(dist)) + 1


def predict_mmse(
    model: FactorModel, target: int, evidence: Mapping[int, int]
) -> float:
    """Posterior mean of the target's numeric code."""
    dist = conditional_target_dist(model, target, evidence)
    codes = np.arange(1, model.alphabet_sizes[target] + 1)
    return float(dist @ codes)
