"""Separable-NMF initialisation on the stacked pairwise-marginal matrix.

The pairwise marginals between two disjoint variable groups tile a block
matrix that factors as (stacked conditionals) x (prior-scaled stacked
conditionals). When the right factor contains near-unit rows, successive
projection picks those rows out as columns of the block matrix, after which
every conditional PMF matrix and the prior follow from block slicing, a
nonnegative least squares fit, and one linear system.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import khatri_rao

from .errors import MissingPairError, RankDeficiencyError
from .marginals import PairwiseSet
from .model import FactorModel
from .util import l1_normalize_columns

logger = logging.getLogger(__name__)

# Columns with less l1 mass than this are dropped before normalisation.
COLUMN_MASS_TOL = 1e-12

# Relative singular-value threshold below which the selected columns are
# treated as rank deficient.
RANK_TOL = 1e-10


@dataclass(frozen=True)
class VirtualMatrix:
    """Block matrix of pairwise marginals between a variable split.

    Rows stack the first-group variables, columns the second group; block
    ``(m, n)`` is the pairwise marginal of variables ``m`` and ``n``.
    """

    data: np.ndarray
    row_vars: tuple[int, ...]
    col_vars: tuple[int, ...]
    row_offsets: tuple[int, ...]
    col_offsets: tuple[int, ...]
    alphabet_sizes: tuple[int, ...]

    def row_block(self, mat: np.ndarray, position: int) -> np.ndarray:
        """Rows of ``mat`` belonging to the ``position``-th row variable."""
        lo, hi = self.row_offsets[position], self.row_offsets[position + 1]
        return mat[lo:hi]

    def col_block(self, mat: np.ndarray, position: int) -> np.ndarray:
        """Rows of ``mat`` belonging to the ``position``-th column variable

        when ``mat`` stacks the column-group variables (e.g. the fitted
        right factor).
        """
        lo, hi = self.col_offsets[position], self.col_offsets[position + 1]
        return mat[lo:hi]

    def column_source(self, q: int) -> tuple[int, int]:
        """(variable, 1-based code) that column ``q`` of ``data`` encodes."""
        pos = int(np.searchsorted(self.col_offsets, q, side="right")) - 1
        return self.col_vars[pos], q - self.col_offsets[pos] + 1


@dataclass(frozen=True)
class SpaResult:
    """Model extracted by the projection-based initialiser plus diagnostics."""

    selected_indices: tuple[int, ...]
    model: FactorModel
    kappa: float
    nnls_residual: float
    nnls_converged: bool
    prior_residual: float
    dropped_columns: int


def build_virtual(pairs: PairwiseSet, split_size: int) -> VirtualMatrix:
    """Assemble the block matrix for the split {0..M-1} vs {M..N-1}."""
    n_vars = pairs.num_vars
    if not 1 <= split_size < n_vars:
        raise ValueError(f"split size must lie in 1..{n_vars - 1}, got {split_size}")
    row_vars = tuple(range(split_size))
    col_vars = tuple(range(split_size, n_vars))
    sizes = pairs.alphabet_sizes
    row_offsets = np.concatenate([[0], np.cumsum([sizes[m] for m in row_vars])])
    col_offsets = np.concatenate([[0], np.cumsum([sizes[n] for n in col_vars])])
    data = np.zeros((row_offsets[-1], col_offsets[-1]))
    for a, m in enumerate(row_vars):
        for b, n in enumerate(col_vars):
            if not pairs.has(m, n):
                raise MissingPairError(m, n)
            data[
                row_offsets[a] : row_offsets[a + 1],
                col_offsets[b] : col_offsets[b + 1],
            ] = pairs.get(m, n)
    return VirtualMatrix(
        data=data,
        row_vars=row_vars,
        col_vars=col_vars,
        row_offsets=tuple(int(x) for x in row_offsets),
        col_offsets=tuple(int(x) for x in col_offsets),
        alphabet_sizes=tuple(sizes),
    )


def normalized_columns(vm: VirtualMatrix) -> tuple[np.ndarray, np.ndarray]:
    """Column-l1-normalised copy of the block matrix.

    Columns whose mass falls below ``COLUMN_MASS_TOL`` are dropped with a
    warning. Returns the normalised matrix and the surviving original
    column indices.
    """
    mass = vm.data.sum(axis=0)
    keep = np.flatnonzero(mass > COLUMN_MASS_TOL)
    if keep.size < vm.data.shape[1]:
        warnings.warn(
            f"dropping {vm.data.shape[1] - keep.size} near-empty columns "
            "before normalisation",
            RuntimeWarning,
            stacklevel=2,
        )
    return vm.data[:, keep] / mass[keep], keep


def spa_select(xnorm: np.ndarray, rank: int) -> list[int]:
    """Pick ``rank`` column indices by successive projection.

    Each step selects the column with the largest squared l2 norm after
    projecting out the span of the previously selected (original,
    normalised) columns. Projections use incremental Gram-Schmidt with one
    re-orthogonalisation pass.
    """
    xnorm = np.asarray(xnorm, dtype=float)
    if np.any(np.isnan(xnorm)):
        raise ValueError("input matrix contains NaN entries")
    rows, cols = xnorm.shape
    if rank > min(rows, cols):
        raise ValueError(f"rank {rank} exceeds matrix dimensions {xnorm.shape}")
    residual = xnorm.copy()
    basis = np.zeros((rows, rank))
    selected: list[int] = []
    # Zero threshold scaled to the data so degenerate inputs fail loudly.
    tol = max(np.max(np.abs(xnorm)), 1.0) * rows * np.finfo(float).eps
    for step in range(rank):
        norms = np.einsum("ij,ij->j", residual, residual)
        pick = int(np.argmax(norms))
        if norms[pick] <= tol**2:
            raise RankDeficiencyError(
                f"residual vanished after {step} of {rank} selections"
            )
        selected.append(pick)
        v = xnorm[:, pick].copy()
        for _ in range(2):  # Gram-Schmidt, re-orthogonalised once
            v -= basis[:, :step] @ (basis[:, :step].T @ v)
        norm_v = np.linalg.norm(v)
        if norm_v <= tol:
            raise RankDeficiencyError(
                f"selected column {pick} is numerically dependent on earlier picks"
            )
        basis[:, step] = v / norm_v
        residual -= np.outer(basis[:, step], basis[:, step] @ residual)
    return selected


def nnls_columns(
    w: np.ndarray,
    x: np.ndarray,
    max_iters: int = 500,
    rel_tol: float = 1e-10,
) -> tuple[np.ndarray, float, bool]:
    """Solve ``min_{H >= 0} ||X - W H^T||_F^2`` by projected gradient.

    The per-column least-squares problems share the left factor, so they are
    stepped jointly with the Lipschitz step ``1 / sigma_max(W)^2``. The
    iteration warm-starts from the clipped unconstrained solution, which on
    consistent inputs is already optimal. Returns the fitted ``H`` (columns
    of ``X`` as rows), the final residual norm, and a convergence flag.
    """
    sigma_max = np.linalg.norm(w, 2)
    if sigma_max <= 0:
        raise RankDeficiencyError("left factor is numerically zero")
    ht = np.clip(np.linalg.lstsq(w, x, rcond=None)[0], 0.0, None)
    step = 1.0 / sigma_max**2
    gram = w.T @ w
    wtx = w.T @ x
    obj = np.sum((x - w @ ht) ** 2)
    converged = False
    for _ in range(max_iters):
        grad = gram @ ht - wtx
        ht = np.maximum(ht - step * grad, 0.0)
        new_obj = np.sum((x - w @ ht) ** 2)
        denom = max(obj, np.finfo(float).tiny)
        if abs(obj - new_obj) / denom < rel_tol:
            obj = new_obj
            converged = True
            break
        obj = new_obj
    return ht.T, float(np.sqrt(obj)), converged


def extract_model(vm: VirtualMatrix, selected: list[int]) -> SpaResult:
    """Recover every conditional PMF matrix and the prior from the selection.

    ``selected`` indexes columns of the normalised block matrix. The
    first-group conditionals are sliced from those columns, the second-group
    conditionals from a nonnegative least-squares fit against the raw block
    matrix, and the prior from the Khatri-Rao linear system it satisfies.
    """
    xnorm, _ = normalized_columns(vm)
    w_hat = xnorm[:, list(selected)]
    rank = w_hat.shape[1]
    if len(set(selected)) != rank:
        raise ValueError("selected column indices must be distinct")
    svals = np.linalg.svd(w_hat, compute_uv=False)
    if svals[-1] <= RANK_TOL * svals[0]:
        raise RankDeficiencyError(
            f"selected columns are rank deficient (condition {svals[0] / max(svals[-1], np.finfo(float).tiny):.3g})"
        )
    kappa = float(svals[0] / svals[-1])

    factors: list[np.ndarray] = [None] * len(vm.alphabet_sizes)  # type: ignore[list-item]
    for pos, m in enumerate(vm.row_vars):
        factors[m] = l1_normalize_columns(vm.row_block(w_hat, pos))

    h_hat, nnls_residual, nnls_converged = nnls_columns(w_hat, vm.data)
    if not nnls_converged:
        logger.warning(
            "nonnegative least squares stopped at iteration cap; "
            "residual %.3g", nnls_residual,
        )
    for pos, n in enumerate(vm.col_vars):
        factors[n] = l1_normalize_columns(vm.col_block(h_hat, pos))

    w_stack = np.vstack([factors[m] for m in vm.row_vars])
    h_stack = np.vstack([factors[n] for n in vm.col_vars])
    system = khatri_rao(h_stack, w_stack)
    prior, *_ = np.linalg.lstsq(system, vm.data.ravel(order="F"), rcond=None)
    prior_residual = float(
        np.linalg.norm(system @ prior - vm.data.ravel(order="F"))
    )
    prior = np.clip(prior, 0.0, None)
    total = prior.sum()
    if total <= 0:  # degenerate fit; keep the prior on the simplex
        prior = np.full(rank, 1.0 / rank)
    else:
        prior = prior / total

    model = FactorModel(factors, prior)
    return SpaResult(
        selected_indices=tuple(int(i) for i in selected),
        model=model,
        kappa=kappa,
        nnls_residual=nnls_residual,
        nnls_converged=nnls_converged,
        prior_residual=prior_residual,
        dropped_columns=vm.data.shape[1] - xnorm.shape[1],
    )


def fit_spa(pairs: PairwiseSet, rank: int, split_size: int) -> SpaResult:
    """Run the full initialiser: block assembly, selection, extraction.

    Selection indices live in the normalised-column space; extraction
    recomputes the same normalisation, so drop bookkeeping stays consistent.
    """
    vm = build_virtual(pairs, split_size)
    xnorm, _ = normalized_columns(vm)
    selected = spa_select(xnorm, rank)
    return extract_model(vm, selected)


def default_split(num_vars: int, rank: int, alphabet_sizes) -> int:
    """Smallest split that leaves the stacked left factor tall enough."""
    i_min = int(min(alphabet_sizes))
    return min(num_vars - 1, max(1, -(-rank // i_min)))
