"""Coupled KL factorisation of the pairwise marginals by block coordinate descent.

Each conditional PMF matrix, and then the prior, is updated in turn by an
exponentiated-gradient step that keeps columns on the simplex. Steps are
backtracked until the block's contribution to the generalised KL objective
does not increase, which makes the full objective trace non-increasing by
construction.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .errors import EmptyPairSetError, NumericalError
from .marginals import PairwiseSet
from .model import FactorModel
from .report import FitReport
from .util import PROB_FLOOR, as_rng, l1_normalize_columns, uniform_simplex

# Exponent magnitudes are clipped here before exp(); acceptance of a step is
# still gated on the objective, so this cannot break monotonicity.
_EXP_CLIP = 50.0

_BACKTRACK_LIMIT = 20


@dataclass(frozen=True)
class OptConfig:
    """Knobs for the block coordinate descent loop."""

    max_outer_iters: int = 200
    inner_md_iters: int = 10
    step0: float = 1.0
    rel_tol: float = 1e-6
    floor: float = PROB_FLOOR
    seed: int = 0

    def __post_init__(self):
        if self.max_outer_iters <= 0 or self.inner_md_iters <= 0:
            raise ValueError("iteration counts must be positive")
        if self.step0 <= 0 or self.floor <= 0:
            raise ValueError("step0 and floor must be positive")
        if not 0 < self.rel_tol < 1:
            raise ValueError("rel_tol must lie in (0, 1)")


def _generalized_kl(x: np.ndarray, m: np.ndarray, floor: float) -> float:
    m = np.maximum(m, floor)
    pos = x > 0
    val = float(np.sum(m) - np.sum(x))
    val += float(np.sum(x[pos] * np.log(x[pos] / m[pos])))
    return val


def kl_objective(
    model: FactorModel, pairs: PairwiseSet, floor: float = PROB_FLOOR
) -> float:
    """Generalised KL divergence summed over all available pairs."""
    if not pairs.entries:
        raise EmptyPairSetError("no pairwise marginals available")
    total = 0.0
    scaled = [a * model.prior for a in model.factors]
    for (j, k), x in pairs.entries.items():
        total += _generalized_kl(x, scaled[j] @ model.factors[k].T, floor)
    return total


def _pair_objective(
    model: FactorModel, pairs: PairwiseSet, var: int, floor: float
) -> float:
    """Objective restricted to the pairs touching ``var``."""
    total = 0.0
    scaled_prior = model.prior
    for (j, k), x in pairs.entries.items():
        if j != var and k != var:
            continue
        m = (model.factors[j] * scaled_prior) @ model.factors[k].T
        total += _generalized_kl(x, m, floor)
    return total


def _factor_gradient(
    model: FactorModel, pairs: PairwiseSet, var: int, floor: float
) -> np.ndarray | None:
    """Gradient of the generalised KL objective w.r.t. one factor matrix."""
    grad = None
    for (j, k), x in pairs.entries.items():
        if j != var and k != var:
            continue
        m = np.maximum((model.factors[j] * model.prior) @ model.factors[k].T, floor)
        ratio = 1.0 - x / m
        if k == var:
            term = ratio.T @ (model.factors[j] * model.prior)
        else:
            term = ratio @ (model.factors[k] * model.prior)
        grad = term if grad is None else grad + term
    if grad is not None and not np.all(np.isfinite(grad)):
        bad = [(j, k) for (j, k) in pairs.entries if var in (j, k)]
        raise NumericalError(f"non-finite gradient while updating variable {var}; pairs {bad}")
    return grad


def _prior_gradient(model: FactorModel, pairs: PairwiseSet, floor: float) -> np.ndarray:
    grad = np.zeros(model.rank)
    for (j, k), x in pairs.entries.items():
        m = np.maximum((model.factors[j] * model.prior) @ model.factors[k].T, floor)
        ratio = 1.0 - x / m
        grad += np.einsum("if,ij,jf->f", model.factors[j], ratio, model.factors[k])
    if not np.all(np.isfinite(grad)):
        raise NumericalError("non-finite gradient while updating the prior")
    return grad


def _eg_step(block: np.ndarray, grad: np.ndarray, step: float) -> np.ndarray:
    """One exponentiated-gradient step followed by column renormalisation."""
    updated = block * np.exp(np.clip(-step * grad, -_EXP_CLIP, _EXP_CLIP))
    if updated.ndim == 1:
        total = updated.sum()
        return updated / total if total > 0 else np.full_like(updated, 1 / updated.size)
    return l1_normalize_columns(updated)


def md_update_factor(
    model: FactorModel, var: int, pairs: PairwiseSet, cfg: OptConfig
) -> FactorModel:
    """Backtracked multiplicative update of one conditional PMF matrix.

    Leaves the model unchanged when no stored pair touches ``var`` or when
    no step length up to ``step0`` avoids increasing the block objective.
    """
    grad = _factor_gradient(model, pairs, var, cfg.floor)
    if grad is None:
        return model
    before = _pair_objective(model, pairs, var, cfg.floor)
    step = cfg.step0
    for _ in range(_BACKTRACK_LIMIT + 1):
        candidate_factor = _eg_step(model.factors[var], grad, step)
        factors = list(model.factors)
        factors[var] = candidate_factor
        candidate = FactorModel(factors, model.prior)
        if _pair_objective(candidate, pairs, var, cfg.floor) <= before:
            return candidate
        step *= 0.5
    return model


def md_update_prior(model: FactorModel, pairs: PairwiseSet, cfg: OptConfig) -> FactorModel:
    """Backtracked multiplicative update of the latent prior."""
    if not pairs.entries:
        return model
    grad = _prior_gradient(model, pairs, cfg.floor)
    before = kl_objective(model, pairs, cfg.floor)
    step = cfg.step0
    for _ in range(_BACKTRACK_LIMIT + 1):
        candidate = FactorModel(model.factors, _eg_step(model.prior, grad, step))
        if kl_objective(candidate, pairs, cfg.floor) <= before:
            return candidate
        step *= 0.5
    return model


def random_init(pairs: PairwiseSet, rank: int, seed) -> FactorModel:
    """Seeded random model with every column drawn uniformly from the simplex."""
    rng = as_rng(seed)
    factors = [
        np.column_stack([uniform_simplex(rng, size) for _ in range(rank)])
        for size in pairs.alphabet_sizes
    ]
    return FactorModel(factors, uniform_simplex(rng, rank))


def fit_cnmf_opt(
    pairs: PairwiseSet,
    rank: int,
    init: FactorModel | None = None,
    cfg: OptConfig | None = None,
) -> tuple[FactorModel, FitReport]:
    """Cycle factor updates then a prior update until the objective settles.

    Each block receives ``inner_md_iters`` backtracked multiplicative steps
    per outer iteration. Stops when the relative objective change drops
    below ``rel_tol`` or the outer iteration cap is reached.
    """
    cfg = cfg or OptConfig()
    if rank < 1:
        raise ValueError("rank must be at least 1")
    if not pairs.entries:
        raise EmptyPairSetError("no pairwise marginals available")
    model = init if init is not None else random_init(pairs, rank, cfg.seed)
    if model.rank != rank:
        raise ValueError(f"init has rank {model.rank}, expected {rank}")

    report = FitReport(metric="objective")
    start = time.perf_counter()
    previous = kl_objective(model, pairs, cfg.floor)
    for _ in range(cfg.max_outer_iters):
        try:
            for var in range(model.num_vars):
                for _ in range(cfg.inner_md_iters):
                    model = md_update_factor(model, var, pairs, cfg)
            for _ in range(cfg.inner_md_iters):
                model = md_update_prior(model, pairs, cfg)
        except NumericalError as err:
            report.notes.append("aborted on numerical failure")
            report.wall_time = time.perf_counter() - start
            err.report = report  # partial trace travels with the failure
            raise
        current = kl_objective(model, pairs, cfg.floor)
        report.record(current, time.perf_counter() - start)
        if abs(previous - current) < cfg.rel_tol * max(abs(previous), 1e-300):
            report.converged = True
            break
        previous = current
    return model, report
