"""Experiment harness: convergence, invariant and efficiency studies."""

from __future__ import annotations

import csv
import hashlib
import math
import os
import sys
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from ..errors import (
    Breakdown,
    ConfigError,
    IterationLimit,
    LinimpError,
    NoConvergence,
    ResonantSingularity,
    SingularSystem,
)
from ..fields import Grid1D
from ..integrate import method_from_spec, run
from ..problems import ProblemSpec, nlh_cubic, nls_soliton, nls_star, nonlocal_cubic

CSV_HEADER = ["method", "h", "final_error", "max_error", "cpu_seconds", "steps", "status"]
REFERENCE_METHOD = "li:fiveStageInotA:eig=" + ",".join(f"{k}/6" for k in range(1, 6))
CACHE_ENV = "LINIMP_CACHE_DIR"

_memory_cache: dict[str, np.ndarray] = {}


@dataclass
class ExperimentConfig:
    problem: str
    methods: list[str]
    hs: list[float]
    T: float
    problem_params: dict = field(default_factory=dict)
    norm: str = "final"
    out: str | None = None
    reference: str = "auto"
    reference_method: str = REFERENCE_METHOD
    reference_factor: int = 32
    check_residuals: bool = False

    def validate(self) -> "ExperimentConfig":
        if not self.T > 0:
            raise ConfigError("final time T must be positive")
        if not self.methods:
            raise ConfigError("method list is empty")
        if not self.hs:
            raise ConfigError("time-step list is empty")
        bad = [h for h in self.hs if not 0 < h < self.T]
        if bad:
            raise ConfigError(f"time steps must lie in (0, T): {bad}")
        if self.norm not in ("final", "max"):
            raise ConfigError(f"unknown error norm {self.norm!r}")
        if self.reference not in ("auto", "exact", "cached"):
            raise ConfigError(f"unknown reference policy {self.reference!r}")
        return self


@dataclass
class RunRecord:
    method: str
    h: float
    final_error: float
    max_error: float
    cpu_seconds: float
    steps: int
    status: str = "completed"
    mode: int | None = None
    mass_drift: float | None = None
    energy_drift: float | None = None

    def __post_init__(self):
        if self.status == "completed" and not (math.isfinite(self.final_error) and math.isfinite(self.max_error)):
            self.status = "diverged"


@dataclass
class SlopeFit:
    slope: float
    intercept: float
    used: int
    excluded: int


def build_problem(name: str, params: dict | None = None) -> ProblemSpec:
    params = dict(params or {})
    if name == "soliton1d":
        g = Grid1D(float(params.pop("left", -50.0)), float(params.pop("right", 50.0)), int(params.pop("M", 2**12)))
        keys = ("q", "alpha", "c", "x0")
        kw = {k: float(params.pop(k)) for k in keys if k in params}
        p = nls_soliton(grid=g, **kw)
    elif name == "nlh1d":
        g = Grid1D(float(params.pop("left", -50.0)), float(params.pop("right", 50.0)), int(params.pop("M", 2**12)))
        p = nlh_cubic(g)
    elif name == "nonlocal":
        p = nonlocal_cubic(int(params.pop("K", 30)))
    elif name == "star2d":
        p = nls_star(float(params.pop("q", 1.0)), float(params.pop("R", 1.0)), int(params.pop("refine", 3)))
    else:
        raise ConfigError(f"unknown problem {name!r}")
    if params:
        raise ConfigError(f"unused parameters for {name}: {sorted(params)}")
    return p


def resonant_steps(alpha: float, ks: Iterable[int]) -> list[float]:
    """Steps h_k = 1 / (alpha k^2) at which 1 - h k^2 alpha = 0."""
    if not alpha > 0:
        raise ConfigError("alpha must be positive")
    return [1.0 / (alpha * k * k) for k in ks]


def fit_slope(hs: Sequence[float], errors: Sequence[float]) -> SlopeFit:
    """Least-squares slope of log10 error against log10 h over finite positive errors."""
    hs = np.asarray(hs, dtype=float)
    errors = np.asarray(errors, dtype=float)
    ok = np.isfinite(errors) & (errors > 0)
    if ok.sum() < 2:
        return SlopeFit(float("nan"), float("nan"), int(ok.sum()), int((~ok).sum()))
    slope, icpt = np.polyfit(np.log10(hs[ok]), np.log10(errors[ok]), 1)
    return SlopeFit(float(slope), float(icpt), int(ok.sum()), int((~ok).sum()))


def _cache_key(p: ProblemSpec, T: float, method: str, h: float) -> str:
    raw = f"{p.key()}|T={T!r}|{method}|h={h!r}"
    return hashlib.sha256(raw.encode()).hexdigest()[:24]


def reference_solution(p: ProblemSpec, T: float, h_ref: float, method: str = REFERENCE_METHOD) -> np.ndarray:
    """High-order run used where no exact solution exists; cached in memory and
    under ``$LINIMP_CACHE_DIR`` when that variable is set."""
    key = _cache_key(p, T, method, h_ref)
    if key in _memory_cache:
        return _memory_cache[key]
    cache_dir = os.environ.get(CACHE_ENV)
    path = Path(cache_dir) / f"ref_{key}.npy" if cache_dir else None
    if path is not None and path.exists():
        u = np.load(path)
    else:
        u = run(method_from_spec(method), p, h_ref, T, exact_steps=True).u
        if path is not None:
            path.parent.mkdir(parents=True, exist_ok=True)
            np.save(path, u)
    _memory_cache[key] = u
    return u


def _classify_failure(exc: Exception) -> tuple[str, int | None]:
    if isinstance(exc, ResonantSingularity):
        return "solver-failure", exc.mode
    if isinstance(exc, (SingularSystem, IterationLimit, Breakdown, NoConvergence)):
        return "solver-failure", None
    return "diverged", None


def run_one(
    method: str,
    p: ProblemSpec,
    h: float,
    T: float,
    reference: np.ndarray | None = None,
    *,
    track_max: bool = False,
    telemetry: bool = False,
    check_residuals: bool = False,
) -> RunRecord:
    """One (method, h) run; failures are recorded, never raised."""
    m = method_from_spec(method)
    steps = max(int(round(T / h)), 1)
    try:
        with np.errstate(over="ignore", invalid="ignore"):
            res = run(
                m, p, h, T,
                telemetry=telemetry,
                track_error=track_max and p.exact is not None,
                check_residuals=check_residuals,
                exact_steps=reference is not None,
            )
    except (LinimpError, FloatingPointError, ArithmeticError) as exc:
        status, mode = _classify_failure(exc)
        if isinstance(exc, ConfigError):
            raise
        return RunRecord(method, h, math.inf, math.inf, math.nan, steps, status, mode)
    target = p.exact(res.t) if reference is None else reference
    with np.errstate(over="ignore", invalid="ignore"):
        final = p.norm(res.u - target)
    max_err = res.max_error if res.max_error is not None else final
    rec = RunRecord(method, h, final, max(max_err, final), res.cpu_seconds, res.steps)
    if telemetry and res.telemetry:
        m0 = res.telemetry[0].mass
        rec.mass_drift = max(abs(r.mass - m0) for r in res.telemetry) / max(m0, 1e-300)
        if res.telemetry[0].energy is not None:
            e0 = res.telemetry[0].energy
            rec.energy_drift = max(abs(r.energy - e0) for r in res.telemetry) / max(abs(e0), 1e-300)
    return rec


def _reference_for(cfg: ExperimentConfig, p: ProblemSpec) -> np.ndarray | None:
    use_exact = cfg.reference == "exact" or (cfg.reference == "auto" and p.exact is not None)
    if use_exact:
        if p.exact is None:
            raise ConfigError(f"{p.name} has no exact solution")
        return None
    h_ref = min(cfg.hs) / cfg.reference_factor
    return reference_solution(p, cfg.T, h_ref, cfg.reference_method)


def convergence_study(cfg: ExperimentConfig, problem: ProblemSpec | None = None):
    """Run every (method, h) pair and fit log-log slopes per method.

    Returns
    -------
    records : list of RunRecord
    slopes : dict mapping method to SlopeFit (diverged and failed runs excluded)
    """
    cfg.validate()
    p = problem or build_problem(cfg.problem, cfg.problem_params)
    ref = _reference_for(cfg, p)
    records = []
    for method in cfg.methods:
        for h in cfg.hs:
            records.append(
                run_one(method, p, h, cfg.T, ref, track_max=cfg.norm == "max", check_residuals=cfg.check_residuals)
            )
    slopes = {}
    for method in cfg.methods:
        rs = [r for r in records if r.method == method]
        errs = [(r.max_error if cfg.norm == "max" else r.final_error) if r.status == "completed" else math.nan for r in rs]
        slopes[method] = fit_slope([r.h for r in rs], errs)
    return records, slopes


def efficiency_study(cfg: ExperimentConfig, problem: ProblemSpec | None = None) -> list[RunRecord]:
    """Records with CPU time of the stepping loop only (setup and reference excluded)."""
    records, _ = convergence_study(cfg, problem)
    return records


@dataclass
class InvariantSeries:
    method: str
    t: np.ndarray
    mass_deviation: np.ndarray
    energy_deviation: np.ndarray | None
    status: str = "completed"


def invariant_study(cfg: ExperimentConfig, problem: ProblemSpec | None = None) -> list[InvariantSeries]:
    """Per-step |I(u_n) - I(u_0)| for mass and (when defined) energy, one series per method.

    Uses the first time step of the configuration.
    """
    cfg.validate()
    p = problem or build_problem(cfg.problem, cfg.problem_params)
    h = cfg.hs[0]
    out = []
    for method in cfg.methods:
        try:
            res = run(method_from_spec(method), p, h, cfg.T, telemetry=True, check_residuals=cfg.check_residuals)
        except (LinimpError, FloatingPointError, ArithmeticError) as exc:
            out.append(InvariantSeries(method, np.array([]), np.array([]), None, _classify_failure(exc)[0]))
            continue
        t = np.array([r.t for r in res.telemetry])
        mass = np.array([r.mass for r in res.telemetry])
        energy = None
        if res.telemetry[0].energy is not None:
            e = np.array([r.energy for r in res.telemetry])
            energy = np.abs(e - e[0])
        out.append(InvariantSeries(method, t, np.abs(mass - mass[0]), energy))
    return out


@contextmanager
def _open_out(path):
    """Text handle for ``path``; ``-`` means standard output."""
    if str(path) == "-":
        yield sys.stdout
        return
    path = Path(path)
    try:
        with path.open("w", newline="") as fh:
            yield fh
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def emit_invariants_csv(series: Sequence[InvariantSeries], path) -> None:
    with _open_out(path) as fh:
        w = csv.writer(fh)
        w.writerow(["method", "t", "mass_deviation", "energy_deviation", "status"])
        for s in series:
            for i in range(len(s.t)):
                e = "" if s.energy_deviation is None else repr(float(s.energy_deviation[i]))
                w.writerow([s.method, repr(float(s.t[i])), repr(float(s.mass_deviation[i])), e, s.status])
            if len(s.t) == 0:
                w.writerow([s.method, "", "", "", s.status])


def _fmt(x: float) -> str:
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(float(x))


def sorted_records(records: Iterable[RunRecord]) -> list[RunRecord]:
    return sorted(records, key=lambda r: (r.method, -r.h))


def emit_csv(records: Iterable[RunRecord], path) -> None:
    """Write ``method,h,final_error,max_error,cpu_seconds,steps,status`` rows; ``-`` is stdout."""
    with _open_out(path) as fh:
        w = csv.writer(fh)
        w.writerow(CSV_HEADER)
        for r in sorted_records(records):
            w.writerow([r.method, _fmt(r.h), _fmt(r.final_error), _fmt(r.max_error), _fmt(r.cpu_seconds), r.steps, r.status])


def parse_csv(path) -> list[RunRecord]:
    path = Path(path)
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != CSV_HEADER:
        raise ConfigError(f"{path}: unexpected header {rows[0] if rows else None}")
    out = []
    for row in rows[1:]:
        method, h, fe, me, cpu, steps, status = row
        out.append(RunRecord(method, float(h), float(fe), float(me), float(cpu), int(steps), status))
    return out


def record_dict(r: RunRecord) -> dict:
    return asdict(r)
