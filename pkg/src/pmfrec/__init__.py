"""Joint PMF recovery of discrete random variables from pairwise marginals."""

from .em import (
    EmConfig,
    Posteriors,
    SeparationStats,
    e_step,
    fit_em,
    log_likelihood,
    m_step,
    separation_stats,
)
from .errors import (
    AlphabetMismatchError,
    CellBudgetError,
    ConfigError,
    DataError,
    DegenerateEvidenceError,
    EmptyPairSetError,
    MissingPairError,
    NumericalError,
    PmfrecError,
    RankDeficiencyError,
)
from .io import read_model, read_samples, write_model, write_samples
from .marginals import PairwiseSet, column_mass_floor, estimate_pairwise, exact_pairwise
from .metrics import Alignment, align, mre, mse, rating_errors
from .model import (
    DEFAULT_CELL_BUDGET,
    FactorModel,
    JointPmf,
    SampleTable,
    conditional_target_dist,
    pairwise_from_model,
    predict_map,
    predict_mmse,
    reconstruct_joint,
)
from .opt import (
    OptConfig,
    fit_cnmf_opt,
    kl_objective,
    md_update_factor,
    md_update_prior,
    random_init,
)
from .report import FitReport
from .spa import (
    SpaResult,
    VirtualMatrix,
    build_virtual,
    default_split,
    extract_model,
    fit_spa,
    spa_select,
)
from .synth import (
    PlantReport,
    SynthConfig,
    gen_model,
    make_ground_truth,
    measure_separability,
    plant_separability,
    sample_data,
)

__version__ = "0.1.0"

__all__ = [
    "Alignment",
    "AlphabetMismatchError",
    "CellBudgetError",
    "ConfigError",
    "DEFAULT_CELL_BUDGET",
    "DataError",
    "DegenerateEvidenceError",
    "EmConfig",
    "EmptyPairSetError",
    "FactorModel",
    "FitReport",
    "JointPmf",
    "MissingPairError",
    "NumericalError",
    "OptConfig",
    "PairwiseSet",
    "PlantReport",
    "PmfrecError",
    "Posteriors",
    "RankDeficiencyError",
    "SampleTable",
    "SeparationStats",
    "SpaResult",
    "SynthConfig",
    "VirtualMatrix",
    "align",
    "build_virtual",
    "column_mass_floor",
    "conditional_target_dist",
    "default_split",
    "e_step",
    "estimate_pairwise",
    "exact_pairwise",
    "extract_model",
    "fit_cnmf_opt",
    "fit_em",
    "fit_spa",
    "gen_model",
    "kl_objective",
    "log_likelihood",
    "m_step",
    "make_ground_truth",
    "md_update_factor",
    "md_update_prior",
    "measure_separability",
    "mre",
    "mse",
    "pairwise_from_model",
    "plant_separability",
    "predict_map",
    "predict_mmse",
    "random_init",
    "rating_errors",
    "read_model",
    "read_samples",
    "reconstruct_joint",
    "sample_data",
    "separation_stats",
    "spa_select",
    "write_model",
    "write_samples",
]
