"""Experiment harness and command line interface."""

from .harness import (
    CSV_HEADER,
    REFERENCE_METHOD,
    ExperimentConfig,
    InvariantSeries,
    RunRecord,
    SlopeFit,
    build_problem,
    convergence_study,
    efficiency_study,
    emit_csv,
    emit_invariants_csv,
    fit_slope,
    invariant_study,
    parse_csv,
    reference_solution,
    resonant_steps,
    run_one,
)

__all__ = [
    "CSV_HEADER",
    "REFERENCE_METHOD",
    "ExperimentConfig",
    "InvariantSeries",
    "RunRecord",
    "SlopeFit",
    "build_problem",
    "convergence_study",
    "efficiency_study",
    "emit_csv",
    "emit_invariants_csv",
    "fit_slope",
    "invariant_study",
    "parse_csv",
    "reference_solution",
    "resonant_steps",
    "run_one",
]
