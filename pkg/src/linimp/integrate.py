"""Time steppers: linearly implicit methods and reference schemes.

All steppers act on value arrays in the storage representation of the
problem operator. A linearly implicit step from (u_n, Gamma_{n-1}) is

    Gamma_n = D Gamma_{n-1} + Theta N(u_n)
    (I - h A (x) L) U_n - h A (Gamma_n . U_n) = u_n 1
    u_{n+1} = u_n + h sum_i b_i (L + gamma_{n,i}) u_{n,i}
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .auxvars import AuxScheme, build_aux, gamma_update
from .errors import CannotInitialize, ConfigError, NoConvergence
from .fields import Field, FDOperator, FVOperator, check_finite
from .problems import ProblemSpec
from .solvers import assemble_stage_system, banded_lu_factor, bicgstab, solve_stage_system
from .solvers.banded import BandedMatrixC
from .tableau import REGISTRY_NODES, ButcherTableau, registry

Array = np.ndarray
BOOTSTRAP_SUBSTEPS = 64
CN_TOL = 1e-12
CN_SWEEPS = 50


@dataclass
class StepperState:
    t: float
    u: Field
    gamma_prev: Array | None = None
    n: int = 0

    @property
    def values(self) -> Array:
        return self.u.values


# ---------------------------------------------------------------------------
# linearly implicit methods


@dataclass(frozen=True)
class LIMethod:
    tableau: ButcherTableau
    aux: AuxScheme
    name: str = ""

    def __post_init__(self):
        if not np.allclose(self.tableau.c, self.aux.nodes, atol=1e-14, rtol=0):
            raise ConfigError("tableau and auxiliary scheme use different nodes")

    @classmethod
    def from_registry(cls, name: str, eig: Sequence[complex]) -> "LIMethod":
        t = registry(name)
        return cls(t, build_aux(REGISTRY_NODES[name], eig), name=f"li:{name}")

    @property
    def s(self) -> int:
        return self.tableau.s

    def initialize(self, p: ProblemSpec, h: float) -> StepperState:
        return initialize(self, p, h)

    def step(self, p: ProblemSpec, h: float, st: StepperState, check_residuals: bool = False) -> StepperState:
        return li_step(self, p, h, st, check_residuals=check_residuals)


def li_step(m: LIMethod, p: ProblemSpec, h: float, st: StepperState, check_residuals: bool = False) -> StepperState:
    if not h > 0:
        raise ConfigError("time step must be positive")
    u = st.u.values
    G = gamma_update(m.aux, st.gamma_prev, p.N(u))
    sys = assemble_stage_system(m.tableau, p.L, G, h)
    U = solve_stage_system(sys, u, check_residual=check_residuals)
    incr = p.L.apply(U) + G * U
    u_new = check_finite(u + h * (m.tableau.b @ incr), "u_{n+1}")
    return StepperState(st.t + h, Field(u_new, p.grid), G, st.n + 1)


def initialize(m: LIMethod, p: ProblemSpec, h: float) -> StepperState:
    """Initial state (u_0, Gamma_{-1}).

    With an exact solution, ``u_0 = u(0)`` and ``gamma_{-1,i} = N(u((c_i - 1) h))``.
    Otherwise the values ``N(u(c_i h))`` and ``u(h)`` are computed forward by
    Strang splitting with small substeps and the run starts at ``t = h``.
    """
    c = m.tableau.c
    if p.exact is not None:
        G = np.stack([p.N(p.exact((ci - 1) * h)) for ci in c])
        return StepperState(0.0, Field(p.exact(0.0), p.grid), G, 0)
    if not p.bootstrap:
        raise CannotInitialize(f"{p.name}: no exact solution and no bootstrap integrator")
    G = np.stack([p.N(_strang_substeps(p, ci * h, p.u0)) for ci in c])
    u1 = _strang_substeps(p, h, p.u0)
    return StepperState(h, Field(u1, p.grid), G, 1)


def _strang_substeps(p: ProblemSpec, span: float, u: Array, n: int = BOOTSTRAP_SUBSTEPS) -> Array:
    if span == 0:
        return np.array(u, dtype=complex)
    dt = span / n
    for _ in range(n):
        u = strang_step(p, dt, u)
    return u


def consistency_residuals(m: LIMethod, p: ProblemSpec, h: float, t_n: float) -> tuple[float, float, float]:
    """Norms of the three consistency errors of the scheme at t_n.

    Exact-solution samples are plugged into the auxiliary update, the stage
    system and the final update. ``L u`` is taken from ``p.exact_Lu`` when
    available. Stacked quantities use the maximum of the stage norms.
    """
    if p.exact is None:
        raise CannotInitialize("consistency residuals need an exact solution")
    if not h > 0:
        raise ConfigError("time step must be positive")
    A, b, c = m.tableau.A, m.tableau.b, m.tableau.c
    a = m.aux
    Lu = p.exact_Lu or (lambda t: p.L.apply(p.exact(t)))

    u_n = p.exact(t_n)
    U = np.stack([p.exact(t_n + ci * h) for ci in c])
    N_now = np.stack([p.N(ui) for ui in U])
    N_prev = np.stack([p.N(p.exact(t_n - h + ci * h)) for ci in c])
    R1 = N_now - a.D @ N_prev - np.multiply.outer(a.theta, p.N(u_n))

    F = np.stack([Lu(t_n + ci * h) for ci in c]) + N_now * U
    R2 = U - u_n - h * (A @ F)
    R3 = p.exact(t_n + h) - u_n - h * (b @ F)
    norm = p.norm
    return max(norm(r) for r in R1), max(norm(r) for r in R2), norm(R3)


# ---------------------------------------------------------------------------
# reference one-step schemes


def _cayley(p: ProblemSpec, h: float, v: Array) -> Array:
    """(I - h/2 L)^{-1} (I + h/2 L) v with factorisations cached per step size."""
    L = p.L
    rhs = v + 0.5 * h * L.apply(v)
    if isinstance(L, FDOperator):
        key = ("cayley", h)
        lu = p.cache.get(key)
        if lu is None:
            off, d = L.coeffs
            n = L.size
            data = np.zeros((n, 3), dtype=complex)
            data[:, 0] = data[:, 2] = -0.5 * h * off
            data[:, 1] = 1 - 0.5 * h * d
            data[0, 0] = data[-1, 2] = 0
            lu = banded_lu_factor(BandedMatrixC(n, 1, 1, data))
            if len(p.cache) > 64:
                p.cache.clear()
            p.cache[key] = lu
        return check_finite(lu.solve(rhs), "Cayley step")
    if isinstance(L, FVOperator):
        return _fv_shifted(L, 0.5 * h, rhs, None, x0=v)
    return L.shifted_solve(0.5 * h, rhs)


def _fv_shifted(L: FVOperator, sigma: float, rhs: Array, diag: Array | None, x0: Array | None) -> Array:
    import scipy.sparse as sp

    M = sp.identity(L.size, format="csr") - sigma * L.matrix
    if diag is not None:
        M = (M - sigma * sp.diags(diag)).tocsr()
    inv_d = 1.0 / M.diagonal()
    x = bicgstab(lambda v: M @ v, lambda v: inv_d * v, rhs, tol=1e-12, maxit=10_000, x0=x0)
    return check_finite(x, "shifted solve")


def crank_nicolson_step(p: ProblemSpec, h: float, u_n: Array) -> Array:
    """(u1 - u0)/h = (L + (N(u1) + N(u0))/2) (u1 + u0)/2 by fixed-point sweeps.

    Each sweep freezes ``N(u1)`` at the previous iterate and solves the
    resulting linear system for u1.
    """
    L = p.L
    u_n = np.asarray(u_n, dtype=complex)
    N0 = p.N(u_n)
    Lu = L.apply(u_n)
    v = u_n
    for _ in range(CN_SWEEPS):
        G = 0.5 * (p.N(v) + N0)
        rhs = u_n + 0.5 * h * (Lu + G * u_n)
        if isinstance(L, FVOperator):
            v_new = _fv_shifted(L, 0.5 * h, rhs, G, x0=v)
        else:
            v_new = L.shifted_solve(0.5 * h, rhs, diag=G)
        diff = np.linalg.norm(v_new - v)
        v = v_new
        if diff <= CN_TOL * max(np.linalg.norm(v), np.finfo(float).tiny):
            return v
    raise NoConvergence(f"Crank-Nicolson fixed point did not converge in {CN_SWEEPS} sweeps")


def strang_step(p: ProblemSpec, h: float, u_n: Array) -> Array:
    """Half nonlinear flow, Cayley step for L, half nonlinear flow."""
    u1 = np.exp(0.5 * h * p.N(u_n)) * u_n
    u2 = _cayley(p, h, u1)
    return check_finite(np.exp(0.5 * h * p.N(u2)) * u2, "Strang step")


def lie_step(p: ProblemSpec, h: float, u_n: Array) -> Array:
    u1 = np.exp(h * p.N(u_n)) * u_n
    return _cayley(p, h, u1)


SUZUKI_A1 = 1.0 / (2.0 - 2.0 ** (1.0 / 3.0))
SUZUKI_A2 = 1.0 - 2.0 * SUZUKI_A1


def suzuki_step(base: Callable[[ProblemSpec, float, Array], Array]) -> Callable[[ProblemSpec, float, Array], Array]:
    """Order-4 composition Phi_{a1 h} o Phi_{a2 h} o Phi_{a1 h} of a symmetric order-2 map."""

    def step(p, h, u):
        u = base(p, SUZUKI_A1 * h, u)
        u = base(p, SUZUKI_A2 * h, u)
        return base(p, SUZUKI_A1 * h, u)

    step.__name__ = f"suzuki_{getattr(base, '__name__', 'base')}"
    return step


@dataclass(frozen=True)
class OneStepMethod:
    """Wrapper giving a plain map u_n -> u_{n+1} the stepper interface."""

    fn: Callable[[ProblemSpec, float, Array], Array]
    name: str

    def initialize(self, p: ProblemSpec, h: float) -> StepperState:
        return StepperState(0.0, Field(p.u0, p.grid))

    def step(self, p: ProblemSpec, h: float, st: StepperState, check_residuals: bool = False) -> StepperState:
        return StepperState(st.t + h, Field(self.fn(p, h, st.u.values), p.grid), None, st.n + 1)


# ---------------------------------------------------------------------------
# driver


@dataclass
class Telemetry:
    t: float
    mass: float
    energy: float | None
    error: float | None


@dataclass
class RunResult:
    u: Array
    t: float
    steps: int
    cpu_seconds: float
    telemetry: list[Telemetry] = field(default_factory=list)
    max_error: float | None = None


def run(
    method,
    p: ProblemSpec,
    h: float,
    T: float,
    *,
    telemetry: bool = False,
    track_error: bool = False,
    check_residuals: bool = False,
    exact_steps: bool = False,
) -> RunResult:
    """Advance from 0 to (about) T with constant step h.

    The number of steps is ``round(T / h)``; with ``exact_steps`` the step must
    divide T (to 1e-9 relative) so that the final time is T itself. Timing
    covers the stepping loop only.
    """
    if not h > 0 or not T > 0:
        raise ConfigError("need positive h and T")
    n_total = int(round(T / h))
    if exact_steps and abs(n_total * h - T) > 1e-9 * T:
        raise ConfigError(f"step {h} does not divide final time {T}")
    n_total = max(n_total, 1)
    st = method.initialize(p, h)
    records: list[Telemetry] = []
    max_err = 0.0 if (track_error and p.exact is not None) else None

    def observe(state):
        nonlocal max_err
        err = None
        if max_err is not None:
            err = p.norm(state.u.values - p.exact(state.t))
            max_err = max(max_err, err)
        if telemetry:
            records.append(Telemetry(state.t, p.mass(state.u.values), p.energy(state.u.values), err))

    observe(st)
    start = time.process_time()
    while st.n < n_total:
        st = method.step(p, h, st, check_residuals=check_residuals)
        if telemetry or max_err is not None:
            observe(st)
    elapsed = time.process_time() - start
    return RunResult(st.u.values, n_total * h, n_total, elapsed, records, max_err)


def method_from_spec(spec: str) -> "LIMethod | OneStepMethod":
    """Parse ``li:<tableau>[:eig=a,b,...]``, ``cn``, ``strang``, ``lie``, ``sccn`` or ``scss``."""
    spec = spec.strip()
    simple = {
        "cn": OneStepMethod(crank_nicolson_step, "cn"),
        "strang": OneStepMethod(strang_step, "strang"),
        "lie": OneStepMethod(lie_step, "lie"),
        "sccn": OneStepMethod(suzuki_step(crank_nicolson_step), "sccn"),
        "scss": OneStepMethod(suzuki_step(strang_step), "scss"),
    }
    if spec in simple:
        return simple[spec]
    parts = spec.split(":")
    if parts[0] != "li" or len(parts) < 2:
        raise ConfigError(f"cannot parse method {spec!r}")
    name = parts[1]
    t = registry(name)
    eig = None
    for opt in parts[2:]:
        key, _, val = opt.partition("=")
        if key != "eig":
            raise ConfigError(f"unknown method option {key!r} in {spec!r}")
        eig = [parse_complex(v) for v in val.split(",") if v.strip()]
    if eig is None:
        eig = default_eigenvalues(t.s)
    m = LIMethod(t, build_aux(REGISTRY_NODES[name], eig), name=spec)
    return m


def parse_complex(text: str) -> complex:
    """Parse ``0.5``, ``-1/4``, ``0.5i``, ``i/2`` or ``-0.25j``."""
    tok = text.strip().replace(" ", "").replace("i", "j")
    try:
        num, sep, den = tok.partition("/")
        value = complex(num) if num not in ("j", "-j", "+j") else complex(num.replace("j", "1j"))
        return value / float(den) if sep else value
    except ValueError:
        raise ConfigError(f"cannot parse complex number {text!r}") from None


def default_eigenvalues(s: int) -> list[float]:
    """Real spectrum k/(s+1), k = 1..s, strictly inside the unit disk."""
    return [k / (s + 1) for k in range(1, s + 1)]
