"""Window searches, grid studies and decay-law fits."""

from .decay import DecayFit, DecayLawRegressor, fit_decay, fit_decay_arrays
from .estimators import WindowSearch
from .search import (OBJECTIVES, PERTURBATIVE_CAP, Evaluation, OptimizationResult, SweepSpec,
                     WindowTemplate, evaluate, optimize_window)
from .studies import (COLUMNS, FORMAT_VERSION, ablation_study, gaussian_baseline, handedness_rows,
                      kg_baseline, kg_template, read_csv, run_grid, sweep_negativity, write_csv)

__all__ = [
    "DecayFit", "DecayLawRegressor", "fit_decay", "fit_decay_arrays", "WindowSearch",
    "OBJECTIVES", "PERTURBATIVE_CAP", "Evaluation", "OptimizationResult", "SweepSpec",
    "WindowTemplate", "evaluate", "optimize_window", "COLUMNS", "FORMAT_VERSION",
    "ablation_study", "gaussian_baseline", "handedness_rows", "kg_baseline", "kg_template",
    "read_csv", "run_grid", "sweep_negativity", "write_csv",
]
