"""Preconditioned BiCGStab for complex systems."""

from __future__ import annotations

from typing import Callable

import numpy as np

from ..errors import Breakdown, InvalidInput, IterationLimit

Vec = np.ndarray
BREAKDOWN_TOL = 1e-300


def _run(apply, precond, b, x, tol, maxit, bnorm):
    r = b - apply(x)
    rhat = r.copy()
    rho = alpha = omega = 1.0 + 0j
    v = np.zeros_like(b)
    p = np.zeros_like(b)
    best_x, best_res = x.copy(), np.linalg.norm(r) / bnorm
    for it in range(maxit):
        res = np.linalg.norm(r) / bnorm
        if res < best_res:
            best_x, best_res = x.copy(), res
        if res <= tol:
            return x, res, it, None
        rho_new = np.vdot(rhat, r)
        if abs(rho_new) <= BREAKDOWN_TOL or abs(omega) <= BREAKDOWN_TOL:
            return best_x, best_res, it, "rho"
        beta = (rho_new / rho) * (alpha / omega)
        rho = rho_new
        p = r + beta * (p - omega * v)
        phat = precond(p)
        v = apply(phat)
        denom = np.vdot(rhat, v)
        if abs(denom) <= BREAKDOWN_TOL:
            return best_x, best_res, it, "rhat.v"
        alpha = rho / denom
        s = r - alpha * v
        if np.linalg.norm(s) / bnorm <= tol:
            x = x + alpha * phat
            r = b - apply(x)
            return x, np.linalg.norm(r) / bnorm, it + 1, None
        shat = precond(s)
        t = apply(shat)
        tt = np.vdot(t, t)
        omega = np.vdot(t, s) / tt if abs(tt) > 0 else 0.0
        x = x + alpha * phat + omega * shat
        r = s - omega * t
    res = np.linalg.norm(b - apply(x)) / bnorm
    if res < best_res:
        best_x, best_res = x, res
    return best_x, best_res, maxit, "maxit"


def bicgstab(
    apply: Callable[[Vec], Vec],
    precond: Callable[[Vec], Vec] | None,
    rhs: Vec,
    tol: float = 1e-12,
    maxit: int = 10_000,
    x0: Vec | None = None,
) -> Vec:
    """Solve ``A x = rhs`` to relative residual ``tol`` (right preconditioning).

    A breakdown triggers one restart from the best iterate so far; a second
    breakdown raises :class:`Breakdown`. Exhausting ``maxit`` raises
    :class:`IterationLimit` carrying the best iterate and its residual.
    """
    if tol <= 0:
        raise InvalidInput("tol must be positive")
    b = np.asarray(rhs, dtype=complex)
    bnorm = np.linalg.norm(b)
    if bnorm == 0:
        return np.zeros_like(b)
    if precond is None:
        precond = lambda v: v  # noqa: E731
    x = np.zeros_like(b) if x0 is None else np.array(x0, dtype=complex)
    restarted = False
    while True:
        x, res, used, why = _run(apply, precond, b, x, tol, maxit, bnorm)
        if why is None:
            return x
        if why == "maxit":
            raise IterationLimit(f"BiCGStab stopped after {maxit} iterations, residual {res:.3e}", x=x, residual=res)
        if restarted:
            raise Breakdown(f"BiCGStab breakdown ({why}) after restart, residual {res:.3e}")
        restarted = True
        maxit = max(maxit - used, 1)
