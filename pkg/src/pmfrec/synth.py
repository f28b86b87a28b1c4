"""Synthetic ground-truth models, near-unit-row planting, and sampling."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from .model import FactorModel, SampleTable
from .util import as_rng, l1_normalize_columns


@dataclass(frozen=True)
class SynthConfig:
    """Settings for one synthetic scenario."""

    n_vars: int
    rank: int
    alphabet_sizes: tuple[int, ...]
    num_samples: int
    obs_prob: float = 1.0
    eps: float | None = None
    split: int | None = None
    seed: int = 0

    def __post_init__(self):
        sizes = self.alphabet_sizes
        if isinstance(sizes, int):
            sizes = (sizes,) * self.n_vars
        if len(sizes) == 1 and self.n_vars > 1:
            sizes = tuple(sizes) * self.n_vars
        object.__setattr__(self, "alphabet_sizes", tuple(int(i) for i in sizes))
        if len(self.alphabet_sizes) != self.n_vars:
            raise ValueError("need one alphabet size per variable")
        if self.rank < 1:
            raise ValueError("rank must be at least 1")
        if not 0 < self.obs_prob <= 1:
            raise ValueError("observation probability must lie in (0, 1]")
        if self.eps is not None and self.eps < 0:
            raise ValueError("eps must be nonnegative")
        if self.eps is not None and self.split is None:
            raise ValueError("planting eps requires a split size")


@dataclass(frozen=True)
class PlantReport:
    """What the planting step did: which stacked rows were overwritten,
    the stacked block before column renormalisation, and the separation
    measured on the final model."""

    rows: tuple[int, ...]
    pre_normalization_block: np.ndarray = field(repr=False)
    measured_eps: float


def gen_model(cfg: SynthConfig) -> FactorModel:
    """Random model: uniform(0, 1) entries with columns rescaled to unit l1 mass."""
    rng = as_rng(cfg.seed)
    return _gen_model(rng, cfg.alphabet_sizes, cfg.rank)


def _gen_model(rng: np.random.Generator, sizes, rank: int) -> FactorModel:
    factors = [l1_normalize_columns(rng.uniform(size=(size, rank))) for size in sizes]
    prior = rng.uniform(size=rank)
    return FactorModel(factors, prior / prior.sum())


def _nonneg_sphere_point(rng: np.random.Generator, dim: int, radius: float) -> np.ndarray:
    """Nonnegative vector of exact l2 norm ``radius``.

    A direction is drawn uniformly on the sphere restricted to the sum-zero
    tangent of the simplex, shifted into the nonnegative orthant, and
    rescaled back onto the radius-``radius`` sphere.
    """
    g = rng.standard_normal(dim)
    g -= g.mean()
    norm = np.linalg.norm(g)
    if norm == 0:
        g = np.ones(dim)
        norm = np.linalg.norm(g)
    u = radius * g / norm
    u -= min(u.min(), 0.0)
    norm = np.linalg.norm(u)
    return radius * u / norm if norm > 0 else u


def plant_separability(
    model: FactorModel, split: int, eps: float, rng=None
) -> tuple[FactorModel, PlantReport]:
    """Overwrite rows of the second-group factor stack with near-unit rows.

    Component ``f`` gets one stacked row replaced by ``e_f + u`` with
    ``u >= 0`` and ``||u||_2`` exactly ``eps``; affected factor columns are
    then l1-renormalised. The separation actually achieved after
    renormalisation is measured and returned in the report.
    """
    rng = as_rng(rng)
    rank = model.rank
    if not 0 < split < model.num_vars:
        raise ValueError("split must leave both variable groups nonempty")
    sizes = model.alphabet_sizes[split:]
    stack_rows = int(sum(sizes))
    if stack_rows < rank:
        raise ValueError(
            f"second group offers {stack_rows} rows, fewer than the {rank} needed"
        )
    stack = np.vstack([model.factors[n] for n in range(split, model.num_vars)])
    spacing = stack_rows // rank
    rows = tuple(f * spacing for f in range(rank))
    for f, r in enumerate(rows):
        row = np.zeros(rank)
        row[f] = 1.0
        if eps > 0:
            row += _nonneg_sphere_point(rng, rank, eps)
        stack[r] = row
    pre_block = stack.copy()

    factors = list(model.factors)
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    affected = {int(np.searchsorted(offsets, r, side="right")) - 1 for r in rows}
    for pos in affected:
        block = stack[offsets[pos] : offsets[pos + 1]]
        factors[split + pos] = l1_normalize_columns(block)
    planted = FactorModel(factors, model.prior)
    measured = measure_separability(planted, split)
    return planted, PlantReport(rows, pre_block, measured)


def _bottleneck_feasible(costs: np.ndarray, threshold: float) -> bool:
    """Can every component claim a distinct row with cost <= threshold?"""
    adjacency = csr_matrix(costs.T <= threshold)
    match = maximum_bipartite_matching(adjacency, perm_type="column")
    return int(np.sum(match >= 0)) == costs.shape[1]


def measure_separability(model: FactorModel, split: int) -> float:
    """Worst matched distance of the prior-scaled second-group stack to unit rows.

    Rows of the stacked second-group factors, scaled by the prior and
    l1-normalised, are assigned one-to-one to components; the returned value
    is the smallest achievable maximum l2 distance to the matching unit
    vector.
    """
    if not 0 < split < model.num_vars:
        raise ValueError("split must leave both variable groups nonempty")
    stack = np.vstack([model.factors[n] for n in range(split, model.num_vars)])
    scaled = stack * model.prior
    sums = scaled.sum(axis=1, keepdims=True)
    sums[sums == 0] = 1.0
    normalized = scaled / sums
    rank = model.rank
    if normalized.shape[0] < rank:
        raise ValueError("not enough rows to match every component")
    eye = np.eye(rank)
    costs = np.linalg.norm(normalized[:, None, :] - eye[None, :, :], axis=2)
    levels = np.unique(costs)
    lo, hi = 0, len(levels) - 1
    if not _bottleneck_feasible(costs, levels[hi]):
        raise RuntimeError("bipartite matching failed at the loosest threshold")
    while lo < hi:
        mid = (lo + hi) // 2
        if _bottleneck_feasible(costs, levels[mid]):
            hi = mid
        else:
            lo = mid + 1
    return float(levels[lo])


def sample_data(model: FactorModel, num_samples: int, obs_prob: float, seed) -> SampleTable:
    """Draw seeded samples from the model, hiding each cell independently.

    Each sample draws a component from the prior, then every variable from
    that component's column; cells survive with probability ``obs_prob``.
    """
    if num_samples < 1:
        raise ValueError("need at least one sample")
    if not 0 < obs_prob <= 1:
        raise ValueError("observation probability must lie in (0, 1]")
    rng = as_rng(seed)
    comps = rng.choice(model.rank, size=num_samples, p=model.prior)
    cells = np.zeros((num_samples, model.num_vars), dtype=np.int64)
    for n, a in enumerate(model.factors):
        size = model.alphabet_sizes[n]
        for f in range(model.rank):
            idx = np.flatnonzero(comps == f)
            if idx.size:
                col = a[:, f] / a[:, f].sum()
                cells[idx, n] = rng.choice(size, size=idx.size, p=col) + 1
    if obs_prob < 1:
        hidden = rng.random(cells.shape) >= obs_prob
        cells[hidden] = 0
    return SampleTable(cells, model.alphabet_sizes)


def make_ground_truth(cfg: SynthConfig) -> tuple[FactorModel, PlantReport | None]:
    """Generate a model and, when configured, plant near-unit rows into it."""
    rng = as_rng(cfg.seed)
    model = _gen_model(rng, cfg.alphabet_sizes, cfg.rank)
    if cfg.eps is None:
        return model, None
    planted, plant_report = plant_separability(model, cfg.split, cfg.eps, rng)
    return planted, plant_report
