"""Explicit update of the auxiliary variables.

The auxiliary variables gamma_{n,i} approximate N(u(t_n + c_i h)) and are
refreshed by ``Gamma_n = D Gamma_{n-1} + Theta N(u_n)``. The pair (D, Theta)
is built so that the update reproduces polynomials of degree < s exactly
(``V_c = D V_{c-1} + [Theta, 0, ..., 0]``) and D has a prescribed spectrum.

Construction. Writing ``V_c = V_{c-1} B`` with the binomial matrix
``B[k, j] = C(j, k)`` gives ``D = V_{c-1} (B - w e_1^T) V_{c-1}^{-1}`` with
``Theta = V_{c-1} w``. The characteristic polynomial of ``B - w e_1^T`` is
affine in ``w`` and independent of the nodes, so prescribing the spectrum
is a single s x s linear solve.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Sequence

import numpy as np

from .errors import GridMismatch, SingularTargetSystem, SpectralRadiusTooLarge
from .polynomial import PolynomialC
from .tableau import lagrange_basis


@dataclass(frozen=True)
class AuxScheme:
    D: np.ndarray
    theta: np.ndarray
    eigenvalues: np.ndarray
    nodes: np.ndarray

    @property
    def s(self) -> int:
        return self.D.shape[0]

    @property
    def rho(self) -> float:
        return float(np.max(np.abs(self.eigenvalues)))

    @property
    def delta(self) -> float:
        """Contraction factor fixed halfway between rho(D) and 1."""
        return 0.5 * (1.0 + self.rho)

    @property
    def is_real(self) -> bool:
        return not (np.iscomplexobj(self.D) or np.iscomplexobj(self.theta))


def vandermonde(c: Sequence) -> np.ndarray:
    """V[i, j] = c_i ** j (j = 0..s-1)."""
    c = np.asarray([float(x) for x in c])
    return c[:, None] ** np.arange(c.size)[None, :]


def inverse_vandermonde(c: Sequence) -> np.ndarray:
    """V^{-1} through the Lagrange basis: row j holds the t^j coefficients of every l_i."""
    basis = lagrange_basis(c)
    s = len(basis)
    inv = np.empty((s, s))
    for i, ell in enumerate(basis):
        inv[:, i] = [float(a) for a in ell.coeffs]
    return inv


def _charpoly_exact(M):
    """Characteristic polynomial det(xI - M) of a Fraction matrix (Faddeev--LeVerrier).

    Returns ascending coefficients, monic.
    """
    n = len(M)
    coeffs = [Fraction(0)] * (n + 1)
    coeffs[n] = Fraction(1)
    Mk = [[Fraction(0)] * n for _ in range(n)]
    for k in range(1, n + 1):
        # Mk = M (M_{k-1} + c_{n-k+1} I)
        prev = [row[:] for row in Mk]
        for i in range(n):
            prev[i][i] += coeffs[n - k + 1]
        Mk = [[sum(M[i][l] * prev[l][j] for l in range(n)) for j in range(n)] for i in range(n)]
        coeffs[n - k] = -sum(Mk[i][i] for i in range(n)) / k
    return coeffs


def _binomial_matrix(s: int):
    return [[Fraction(comb(j, k)) for j in range(s)] for k in range(s)]


def _affine_charpoly_map(s: int):
    """(c0, G) with charpoly(B - w e1^T) = c0 + G w on the non-leading coefficients."""
    B = _binomial_matrix(s)
    c0 = _charpoly_exact(B)[:s]
    G = np.empty((s, s))
    for k in range(s):
        M = [row[:] for row in B]
        M[k][0] -= 1
        ck = _charpoly_exact(M)[:s]
        G[:, k] = [float(a - b) for a, b in zip(ck, c0)]
    return np.array([float(a) for a in c0]), G


def build_aux(c: Sequence, eig: Sequence[complex]) -> AuxScheme:
    """Strongly stable, order-s consistent (D, Theta) with spectrum ``eig``."""
    nodes = list(c)
    s = len(nodes)
    eig = np.asarray(eig, dtype=complex)
    if eig.size != s:
        raise ValueError(f"need {s} eigenvalues, got {eig.size}")
    if np.max(np.abs(eig)) >= 1.0:
        raise SpectralRadiusTooLarge(f"max |eig| = {np.max(np.abs(eig))} >= 1")
    shifted = [x - 1 for x in nodes]
    V1 = vandermonde(shifted)
    V1inv = inverse_vandermonde(shifted)
    Vc = vandermonde(nodes)

    c0, G = _affine_charpoly_map(s)
    target = PolynomialC.from_roots(eig).coeffs[:s]
    if np.linalg.cond(G) > 1e12:
        raise SingularTargetSystem("characteristic-coefficient map is singular")
    real = np.allclose(np.sort_complex(eig), np.sort_complex(eig.conj()), atol=1e-14)
    rhs = target - c0
    if real:
        w = np.linalg.solve(G, rhs.real)
    else:
        w = np.linalg.solve(G.astype(complex), rhs)
    theta = V1 @ w
    E1 = np.zeros((s, s), dtype=theta.dtype)
    E1[:, 0] = theta
    D = (Vc - E1) @ V1inv
    return AuxScheme(D=D, theta=theta, eigenvalues=eig, nodes=np.array([float(x) for x in nodes]))


def consistency_defect(a: AuxScheme, c: Sequence | None = None) -> float:
    """max |V_c - D V_{c-1} - [Theta, 0, ...]|."""
    nodes = a.nodes if c is None else np.array([float(x) for x in c])
    Vc = vandermonde(nodes)
    V1 = vandermonde(nodes - 1)
    E1 = np.zeros_like(a.D)
    E1[:, 0] = a.theta
    return float(np.max(np.abs(Vc - a.D @ V1 - E1)))


def gamma_update(a: AuxScheme, gamma_prev: np.ndarray, nu: np.ndarray) -> np.ndarray:
    """Gamma_n = D Gamma_{n-1} + Theta N(u_n), pointwise in space.

    ``gamma_prev`` has shape (s, n) and ``nu`` shape (n,).
    """
    gamma_prev = np.asarray(gamma_prev)
    nu = np.asarray(nu)
    if gamma_prev.ndim != 2 or gamma_prev.shape[0] != a.s:
        raise GridMismatch(f"expected {a.s} auxiliary fields, got shape {gamma_prev.shape}")
    if nu.shape != gamma_prev.shape[1:]:
        raise GridMismatch(f"N(u) has shape {nu.shape}, auxiliary fields {gamma_prev.shape[1:]}")
    return a.D @ gamma_prev + np.multiply.outer(a.theta, nu)
