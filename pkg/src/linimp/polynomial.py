"""Complex polynomials, rational functions and a simultaneous root finder."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import InvalidInput

TRIM_TOL = 1e-13
RESIDUAL_TOL = 1e-12
CLUSTER_TOL = 1e-8


@dataclass(frozen=True)
class PolynomialC:
    """Polynomial with complex coefficients in ascending order: sum_k coeffs[k] z^k."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coeffs, dtype=complex)).copy()
        if c.size == 0:
            c = np.zeros(1, dtype=complex)
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        out = np.zeros_like(z)
        for a in self.coeffs[::-1]:
            out = out * z + a
        return out

    @property
    def degree(self) -> int:
        """Degree after dropping trailing coefficients below TRIM_TOL relative size."""
        return self.trimmed().coeffs.size - 1 if not self.is_zero() else -1

    def is_zero(self, tol: float = 0.0) -> bool:
        return bool(np.all(np.abs(self.coeffs) <= tol))

    def trimmed(self, tol: float = TRIM_TOL, scale: float = 1.0) -> "PolynomialC":
        """Drop leading (high order) coefficients that are negligible.

        Coefficients are compared in the rescaled variable ``z = scale * w``
        so that the test is meaningful when roots are far from the unit circle.
        """
        c = self.coeffs
        w = np.abs(c) * scale ** np.arange(c.size)
        ref = w.max()
        if ref == 0:
            return PolynomialC([0.0])
        keep = np.nonzero(w > tol * ref)[0]
        return PolynomialC(c[: keep[-1] + 1])

    def __add__(self, other):
        other = _as_poly(other)
        n = max(self.coeffs.size, other.coeffs.size)
        out = np.zeros(n, dtype=complex)
        out[: self.coeffs.size] += self.coeffs
        out[: other.coeffs.size] += other.coeffs
        return PolynomialC(out)

    __radd__ = __add__

    def __neg__(self):
        return PolynomialC(-self.coeffs)

    def __sub__(self, other):
        return self + (-_as_poly(other))

    def __mul__(self, other):
        other = _as_poly(other)
        return PolynomialC(np.convolve(self.coeffs, other.coeffs))

    __rmul__ = __mul__

    def deriv(self) -> "PolynomialC":
        if self.coeffs.size == 1:
            return PolynomialC([0.0])
        return PolynomialC(self.coeffs[1:] * np.arange(1, self.coeffs.size))

    def on_imaginary_axis(self) -> "PolynomialC":
        """q(y) = p(i y), as a polynomial in the real variable y."""
        return PolynomialC(self.coeffs * (1j) ** np.arange(self.coeffs.size))

    def conj_coeffs(self) -> "PolynomialC":
        return PolynomialC(np.conj(self.coeffs))

    def roots(self) -> np.ndarray:
        return poly_roots(self)

    @classmethod
    def from_roots(cls, roots, lead=1.0) -> "PolynomialC":
        c = np.array([lead], dtype=complex)
        for r in roots:
            c = np.convolve(c, [-r, 1.0])
        return cls(c)


def _as_poly(x) -> PolynomialC:
    return x if isinstance(x, PolynomialC) else PolynomialC([x])


@dataclass(frozen=True)
class RationalFunctionC:
    numerator: PolynomialC
    denominator: PolynomialC

    def __post_init__(self):
        if self.denominator.is_zero():
            raise InvalidInput("denominator is identically zero")

    def __call__(self, z):
        return self.numerator(z) / self.denominator(z)


def interpolate_polynomial(f: Callable[[complex], complex], degree: int, radius: float = 1.0) -> PolynomialC:
    """Recover a polynomial of known maximal degree from samples on a circle.

    Samples at ``degree + 1`` equispaced points of the circle of the given
    radius are mapped back to coefficients by an inverse DFT, which is exact
    for polynomials of degree <= ``degree`` and well conditioned when the
    radius matches the scale of the roots.
    """
    n = degree + 1
    j = np.arange(n)
    theta = 2 * np.pi * j / n
    vals = np.array([f(zk) for zk in radius * np.exp(1j * theta)], dtype=complex)
    # c_j = (1/n) sum_k f(z_k) e^{-i j theta_k} / r^j
    coeffs = (np.exp(-1j * np.outer(j, theta)) @ vals) / n
    return PolynomialC(coeffs / radius**j)


def _root_bound(c: np.ndarray) -> float:
    # Fujiwara bound on the moduli of the roots of a polynomial with ascending coefficients c
    n = c.size - 1
    lead = c[-1]
    terms = [abs(c[n - k] / lead) ** (1.0 / k) for k in range(1, n + 1)]
    terms[-1] = terms[-1] / 2 ** (1.0 / n)
    return 2.0 * max(terms)


def poly_roots(p: PolynomialC, maxiter: int = 500) -> np.ndarray:
    """All complex roots by Aberth--Ehrlich simultaneous iteration.

    Roots are polished by Newton steps and each is checked against the
    backward error bound |p(z)| <= tol * sum_k |c_k| |z|^k. Roots of multiplicity
    m are returned m times (accurate to roughly eps^(1/m)).
    """
    q = p.trimmed(tol=0.0)
    c = q.coeffs
    if np.all(c == 0):
        raise InvalidInput("zero polynomial has no well-defined roots")
    n = c.size - 1
    if n < 1:
        return np.zeros(0, dtype=complex)
    # zero roots factor out exactly
    nz = 0
    while c[nz] == 0:
        nz += 1
    c = c[nz:]
    n = c.size - 1
    if n == 0:
        return np.zeros(nz, dtype=complex)
    if n == 1:
        return np.concatenate([np.zeros(nz, dtype=complex), [-c[0] / c[1]]])

    poly = PolynomialC(c)
    dpoly = poly.deriv()
    absc = np.abs(c)
    radius = _root_bound(c)
    # geometric mean of root moduli is a better starting radius than the bound
    r0 = abs(c[0] / c[-1]) ** (1.0 / n)
    r0 = min(max(r0, 1e-300), radius)
    z = r0 * np.exp(1j * (2 * np.pi * np.arange(n) / n + 0.4))
    converged = np.zeros(n, dtype=bool)
    for _ in range(maxiter):
        pz = poly(z)
        dz = dpoly(z)
        scale = np.polyval(absc[::-1], np.abs(z))
        small = np.abs(pz) <= 4 * np.finfo(float).eps * scale
        converged |= small
        if np.all(converged):
            break
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = pz / dz
            diff = z[:, None] - z[None, :]
            np.fill_diagonal(diff, 1.0)
            inv = 1.0 / diff
            np.fill_diagonal(inv, 0.0)
            sums = inv.sum(axis=1)
            step = ratio / (1.0 - ratio * sums)
        step = np.where(np.isfinite(step) & ~converged, step, 0.0)
        z = z - step
        if np.all(np.abs(step) <= 1e-16 * np.maximum(np.abs(z), 1e-300)):
            break
    z = _polish(poly, dpoly, z)
    return np.concatenate([np.zeros(nz, dtype=complex), z])


def _polish(poly, dpoly, z, steps: int = 3):
    absc = np.abs(poly.coeffs)
    for _ in range(steps):
        pz = poly(z)
        dz = dpoly(z)
        scale = np.polyval(absc[::-1], np.abs(z))
        ok = (np.abs(dz) > 0) & (np.abs(pz) > np.finfo(float).eps * scale)
        trial = np.where(ok, z - pz / np.where(ok, dz, 1.0), z)
        # keep Newton only where it reduces the residual (protects clustered roots)
        better = np.abs(poly(trial)) < np.abs(pz)
        z = np.where(better, trial, z)
    return z


def root_residuals(p: PolynomialC, z) -> np.ndarray:
    """Relative backward residual |p(z)| / sum_k |c_k||z|^k."""
    z = np.asarray(z, dtype=complex)
    absc = np.abs(p.coeffs)
    scale = np.polyval(absc[::-1], np.abs(z))
    return np.abs(p(z)) / np.where(scale > 0, scale, 1.0)


def cancel_common_roots(num_roots, den_roots, rtol: float = 1e-6):
    """Greedy pairing of numerator and denominator roots that coincide.

    Returns the remaining (numerator, denominator) roots.
    """
    num = list(num_roots)
    rest_den = []
    for d in den_roots:
        best, best_i = None, -1
        for i, r in enumerate(num):
            dist = abs(r - d)
            if dist <= rtol * (1 + abs(d)) and (best is None or dist < best):
                best, best_i = dist, i
        if best_i >= 0:
            num.pop(best_i)
        else:
            rest_den.append(d)
    return np.array(num, dtype=complex), np.array(rest_den, dtype=complex)
