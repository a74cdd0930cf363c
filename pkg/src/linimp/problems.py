"""Concrete semilinear problems du/dt = L u + N(u) u."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import InvalidInput
from .fields import (
    Field,
    FourierGrid,
    Grid1D,
    SpatialOperator,
    energy_nls,
    fd_laplacian,
    fourier_operator,
    fv_laplacian,
    mass,
    star_mesh,
)

Array = np.ndarray


@dataclass
class ProblemSpec:
    """A semilinear problem together with its known solution data.

    Attributes
    ----------
    L : SpatialOperator
    N : callable
        The multiplier ``N(u)`` (not ``N(u) u``), acting on value arrays of
        shape ``(..., n)`` in the storage representation of ``L``.
    u0 : ndarray
        Initial datum.
    exact : callable, optional
        ``t -> u(t)`` on the grid.
    exact_Lu : callable, optional
        ``t -> L u(t)`` computed analytically; used by consistency probes
        so that spatial truncation does not pollute temporal residuals.
    bootstrap : bool
        Whether a forward splitting start is acceptable when ``exact`` is missing.
    """

    name: str
    L: SpatialOperator
    N: Callable[[Array], Array]
    u0: Array
    exact: Callable[[float], Array] | None = None
    exact_Lu: Callable[[float], Array] | None = None
    q: float | None = None
    bootstrap: bool = True
    params: dict = field(default_factory=dict)
    cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def grid(self):
        return self.L.grid

    @property
    def size(self) -> int:
        return self.L.size

    def field(self, values: Array) -> Field:
        return Field(values, self.grid)

    def mass(self, u: Array) -> float:
        return mass(self.field(u))

    def energy(self, u: Array) -> float | None:
        if self.q is None:
            return None
        return energy_nls(self.field(u), self.L, self.q)

    def norm(self, u: Array) -> float:
        return float(np.sqrt(np.sum(self.grid.weights * np.abs(u) ** 2)))

    def key(self) -> str:
        items = ",".join(f"{k}={v!r}" for k, v in sorted(self.params.items()))
        return f"{self.name}({items})"


def _nls_multiplier(q: float):
    def N(u):
        return 1j * q * np.abs(u) ** 2

    return N


def nls_soliton(q: float = 4.0, alpha: float = 1.0, c: float = 0.0, x0: float = 0.0, grid: Grid1D | None = None) -> ProblemSpec:
    """Soliton of i u_t = -u_xx - q |u|^2 u on a Dirichlet FD grid.

    u(t, x) = sqrt(2 alpha / q) sech(sqrt(alpha) xi) e^{i (alpha + c^2/4) t} e^{i c xi / 2},
    xi = x - x0 - c t.
    """
    if q == 0:
        raise InvalidInput("q must be nonzero")
    if not alpha > 0:
        raise InvalidInput("alpha must be positive")
    grid = grid or Grid1D(-50.0, 50.0, 2**12)
    x = grid.x
    amp = np.sqrt(2 * alpha / q)
    ra = np.sqrt(alpha)

    def parts(t):
        xi = x - x0 - c * t
        S = 1.0 / np.cosh(ra * xi)
        phase = np.exp(1j * (alpha + c**2 / 4) * t) * np.exp(1j * c * xi / 2)
        return xi, S, phase

    def exact(t):
        xi, S, phase = parts(t)
        return amp * S * phase

    def exact_Lu(t):
        xi, S, phase = parts(t)
        T = np.tanh(ra * xi)
        S1 = -ra * S * T
        S2 = alpha * S * (1 - 2 * S**2)
        uxx = amp * phase * (S2 + 1j * c * S1 - (c**2 / 4) * S)
        return 1j * uxx

    return ProblemSpec(
        name="soliton1d",
        L=fd_laplacian(grid, 1j),
        N=_nls_multiplier(q),
        u0=exact(0.0),
        exact=exact,
        exact_Lu=exact_Lu,
        q=q,
        params=dict(q=q, alpha=alpha, c=c, x0=x0, left=grid.left, right=grid.right, M=grid.M),
    )


def nlh_cubic(grid: Grid1D | None = None) -> ProblemSpec:
    """u_t = u_xx + u^3 from u0(x) = sin(pi x / 100 + pi / 2) / 2; no exact solution."""
    grid = grid or Grid1D(-50.0, 50.0, 2**12)
    u0 = 0.5 * np.sin(np.pi * grid.x / 100 + np.pi / 2)
    return ProblemSpec(
        name="nlh1d",
        L=fd_laplacian(grid, 1.0),
        N=lambda u: u**2,
        u0=u0.astype(complex),
        params=dict(left=grid.left, right=grid.right, M=grid.M),
    )


def nonlocal_exact_modes(c0: Array, k: Array, t: float, conv_scale: float = -1.0) -> Array:
    """Mode-wise solution of c_k' = -i k^2 c_k + conv_scale c_k^3.

    With ``y0 = c0^2`` and ``conv_scale = -1`` this is
    ``c_k(t)^2 = y0 / ((1 - i y0/k^2) e^{2ik^2 t} + i y0/k^2)``, written as
    ``c0 e^{-ik^2 t} / sqrt(g(t))`` with ``g = 1 - (i y0/k^2)(1 - e^{-2ik^2 t})``
    (for general ``conv_scale`` the factor ``i`` becomes ``-i conv_scale``).
    ``g`` runs over a circle that does not enclose 0 whenever ``|y0| < k^2/2``,
    so the principal root is continuous in t and equals 1 at t = 0.
    """
    c0 = np.asarray(c0, dtype=complex)
    k = np.asarray(k, dtype=float)
    y0 = c0**2
    k2 = k**2
    out = np.empty_like(c0)
    z = k2 == 0
    # k = 0: c' = conv_scale c^3
    out[z] = c0[z] / np.sqrt(1 - 2 * conv_scale * y0[z] * t)
    nz = ~z
    beta = -1j * conv_scale * y0[nz] / k2[nz]
    g = 1 - beta * (1 - np.exp(-2j * k2[nz] * t))
    out[nz] = c0[nz] * np.exp(-1j * k2[nz] * t) / np.sqrt(g)
    return out


def nonlocal_cubic(K: int = 30) -> ProblemSpec:
    """u_t = i u_xx + u * u * u on the 2 pi torus, modes k = 0..K-1, c_k(u0) = e^{-k}."""
    if K < 1:
        raise InvalidInput("K must be positive")
    grid = FourierGrid(K)
    k = grid.modes.astype(float)
    c0 = np.exp(-np.abs(k)).astype(complex)
    if np.any((k != 0) & (np.abs(c0) ** 2 >= k**2 / 2)):
        raise InvalidInput("initial modes too large for a continuous square-root branch")
    scale = grid.conv_scale

    def exact(t):
        return nonlocal_exact_modes(c0, k, t, scale)

    L = fourier_operator(grid, lambda kk: -1j * kk**2, factor=1j)

    def exact_Lu(t):
        return L.symbol * exact(t)

    return ProblemSpec(
        name="nonlocal",
        L=L,
        N=lambda u: scale * u**2,
        u0=c0,
        exact=exact,
        exact_Lu=exact_Lu,
        params=dict(K=K),
    )


def nls_star(q: float = 1.0, R: float = 1.0, refinement: int = 3, u0: Array | None = None) -> ProblemSpec:
    """NLS on the hexagram with two-point flux finite volumes.

    Initial datum sqrt(98/pi) exp(-49 (x^2 + y^2)) exp(-20 i x) sampled at centroids.
    """
    mesh = star_mesh(R, refinement)
    if u0 is None:
        x, y = mesh.centroids[:, 0], mesh.centroids[:, 1]
        u0 = np.sqrt(98 / np.pi) * np.exp(-49 * (x**2 + y**2)) * np.exp(-20j * x)
    return ProblemSpec(
        name="star2d",
        L=fv_laplacian(mesh, 1j),
        N=_nls_multiplier(q),
        u0=np.asarray(u0, dtype=complex),
        q=q,
        params=dict(q=q, R=R, refinement=refinement),
    )


PROBLEMS = {
    "soliton1d": nls_soliton,
    "nlh1d": nlh_cubic,
    "nonlocal": nonlocal_cubic,
    "star2d": nls_star,
}
