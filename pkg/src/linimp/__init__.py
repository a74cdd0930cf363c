"""Linearly implicit collocation integrators for semilinear evolution equations."""

from .auxvars import AuxScheme, build_aux, consistency_defect, gamma_update
from .errors import LinimpError
from .integrate import LIMethod, OneStepMethod, RunResult, method_from_spec, run
from .problems import PROBLEMS, ProblemSpec, nls_soliton, nlh_cubic, nls_star, nonlocal_cubic
from .stability import StabilityReport, classify, stability_function
from .tableau import ButcherTableau, collocation_tableau, registry, registry_names

__version__ = "0.1.0"

__all__ = [
    "AuxScheme",
    "ButcherTableau",
    "LIMethod",
    "LinimpError",
    "OneStepMethod",
    "PROBLEMS",
    "ProblemSpec",
    "RunResult",
    "StabilityReport",
    "build_aux",
    "classify",
    "collocation_tableau",
    "consistency_defect",
    "gamma_update",
    "method_from_spec",
    "nlh_cubic",
    "nls_soliton",
    "nls_star",
    "nonlocal_cubic",
    "registry",
    "registry_names",
    "run",
    "stability_function",
]
