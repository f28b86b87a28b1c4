"""Likelihood-based refinement of a factor model against raw samples.

The expectation step computes per-sample component responsibilities in the
log domain; the maximisation step re-estimates every conditional PMF matrix
and the prior from responsibility-weighted counts. Missing cells simply drop
out of both steps.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .model import FactorModel, SampleTable
from .report import FitReport
from .util import PROB_FLOOR, floored_log

_ROW_SUM_TOL = 1e-9


@dataclass(frozen=True)
class Posteriors:
    """Per-sample responsibilities over the latent components."""

    q: np.ndarray

    def __post_init__(self):
        q = np.asarray(self.q, dtype=float)
        if q.ndim != 2:
            raise ValueError("responsibilities must form an S x F matrix")
        if np.any(q < 0):
            raise ValueError("responsibilities must be nonnegative")
        if np.max(np.abs(q.sum(axis=1) - 1.0)) > _ROW_SUM_TOL:
            raise ValueError("each responsibility row must sum to 1")
        object.__setattr__(self, "q", q)


@dataclass(frozen=True)
class EmConfig:
    max_iters: int = 100
    rel_tol: float = 1e-6

    def __post_init__(self):
        if self.max_iters <= 0:
            raise ValueError("max_iters must be positive")
        if not 0 < self.rel_tol < 1:
            raise ValueError("rel_tol must lie in (0, 1)")


@dataclass(frozen=True)
class SeparationStats:
    """Component-separation diagnostics of a fitted or true model.

    ``d1`` averages the observation-weighted KL divergence between the
    closest pair of component columns; ``d2`` measures how far the prior is
    from uniform; ``d`` is their mean. ``rho1`` and ``rho2`` are the minimum
    factor and prior entries.
    """

    d1: float
    d2: float
    d: float
    rho1: float
    rho2: float


def _log_weights(model: FactorModel, data: SampleTable) -> np.ndarray:
    """log prior + observed log conditionals, one row per sample."""
    model.check_data(data)
    logw = np.tile(floored_log(model.prior), (data.num_samples, 1))
    for n in range(data.num_vars):
        codes = data.cells[:, n]
        obs = codes > 0
        if np.any(obs):
            logw[obs] += floored_log(model.factors[n])[codes[obs] - 1]
    return logw


def log_likelihood(model: FactorModel, data: SampleTable) -> float:
    """Marginal log-likelihood of the observed cells under the model."""
    return float(np.sum(logsumexp(_log_weights(model, data), axis=1)))


def e_step(model: FactorModel, data: SampleTable) -> Posteriors:
    """Responsibilities proportional to prior times observed conditionals.

    Samples with no observed cells get the prior itself, exactly.
    """
    logw = _log_weights(model, data)
    q = np.exp(logw - logsumexp(logw, axis=1, keepdims=True))
    fully_missing = ~np.any(data.cells > 0, axis=1)
    if np.any(fully_missing):
        q[fully_missing] = model.prior
    return Posteriors(q)


def m_step(
    data: SampleTable, post: Posteriors
) -> tuple[FactorModel, list[tuple[int, int]]]:
    """Closed-form re-estimation from responsibility-weighted counts.

    Missing cells contribute to neither numerator nor denominator. Columns
    whose denominator vanishes fall back to uniform; the affected
    ``(variable, component)`` indices are returned alongside the model.
    """
    q = post.q
    n_samples, rank = q.shape
    if n_samples != data.num_samples:
        raise ValueError("responsibilities and samples disagree on S")
    fallbacks: list[tuple[int, int]] = []
    factors = []
    for n, size in enumerate(data.alphabet_sizes):
        codes = data.cells[:, n]
        obs = codes > 0
        numer = np.zeros((size, rank))
        np.add.at(numer, codes[obs] - 1, q[obs])
        denom = numer.sum(axis=0)
        a = np.empty_like(numer)
        for f in range(rank):
            if denom[f] > 0:
                a[:, f] = numer[:, f] / denom[f]
            else:
                a[:, f] = 1.0 / size
                fallbacks.append((n, f))
        factors.append(a)
    prior = q.sum(axis=0) / q.sum()
    return FactorModel(factors, prior), fallbacks


def fit_em(
    data: SampleTable,
    init: FactorModel,
    cfg: EmConfig | None = None,
) -> tuple[FactorModel, FitReport]:
    """Alternate responsibility and count updates until the likelihood settles."""
    cfg = cfg or EmConfig()
    init.check_data(data)
    model = init
    report = FitReport(metric="log_likelihood")
    start = time.perf_counter()
    previous = log_likelihood(model, data)
    for _ in range(cfg.max_iters):
        post = e_step(model, data)
        model, fallbacks = m_step(data, post)
        for n, f in fallbacks:
            report.notes.append(f"uniform fallback for factor {n} component {f}")
        current = log_likelihood(model, data)
        report.record(current, time.perf_counter() - start)
        if abs(current - previous) < cfg.rel_tol * max(abs(previous), 1e-300):
            report.converged = True
            break
        previous = current
    return model, report


def separation_stats(model: FactorModel, obs_prob: float) -> SeparationStats:
    """Separation diagnostics; requires at least two components."""
    if model.rank < 2:
        raise ValueError("separation statistics need at least two components")
    if not 0 < obs_prob <= 1:
        raise ValueError("observation probability must lie in (0, 1]")
    rank = model.rank
    n_vars = model.num_vars
    d1 = np.inf
    for f in range(rank):
        for g in range(rank):
            if f == g:
                continue
            total = 0.0
            for a in model.factors:
                p, r = a[:, f], a[:, g]
                pos = p > 0
                total += obs_prob * float(
                    np.sum(p[pos] * np.log(p[pos] / np.maximum(r[pos], PROB_FLOOR)))
                )
            d1 = min(d1, total / n_vars)
    lam = np.maximum(model.prior, PROB_FLOOR)
    ratios = [
        np.log(lam[f] / lam[g]) for f in range(rank) for g in range(rank) if f != g
    ]
    d2 = float(2.0 / n_vars * min(ratios))
    d = 0.5 * (d1 + d2)
    return SeparationStats(
        d1=float(d1),
        d2=d2,
        d=float(d),
        rho1=float(min(a.min() for a in model.factors)),
        rho2=float(model.prior.min()),
    )
