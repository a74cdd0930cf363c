"""Stability analysis of collocation tableaux and adapted matrix norms.

The eight stability notions used for semilinear problems are decided from
exact polynomial data: numerators and denominators of the stability
function and of the resolvent entries are recovered by interpolation, and
each notion reduces to root locations plus degree comparisons. Nothing is
decided by sampling the half-plane.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .polynomial import (
    PolynomialC,
    RationalFunctionC,
    cancel_common_roots,
    poly_roots,
)
from .tableau import ButcherTableau

ROOT_MARGIN = 1e-9
ZERO_TOL = 1e-11
DEGREE_TOL = 1e-10
E_TOL = 1e-10
REAL_ROOT_TOL = 1e-5


# ---------------------------------------------------------------------------
# polynomial recovery

def _sample_scale(A: np.ndarray) -> float:
    # circle radius matched to the roots of det(I - z A), i.e. 1/|eig(A)|
    rho = np.max(np.abs(np.linalg.eigvals(A))) if A.size else 0.0
    return 1.0 / rho if rho > 1e-12 else 1.0


def _interp(values_at, degree: int, radius: float, phase: float = 0.3) -> PolynomialC:
    # values_at(z) may return an array; coefficients are recovered entrywise
    n = degree + 1
    theta = 2 * np.pi * np.arange(n) / n + phase
    z = radius * np.exp(1j * theta)
    vals = np.array([values_at(zk) for zk in z], dtype=complex)
    # c_j = (1/n) sum_k f(z_k) exp(-i j theta_k) / r^j
    j = np.arange(n)
    kernel = np.exp(-1j * np.outer(j, theta)) / n
    coeffs = np.tensordot(kernel, vals, axes=(1, 0))
    coeffs /= (radius ** j).reshape((-1,) + (1,) * (coeffs.ndim - 1))
    return coeffs


def _adjugate(M: np.ndarray) -> np.ndarray:
    s = M.shape[0]
    if s == 1:
        return np.ones((1, 1), dtype=complex)
    adj = np.empty((s, s), dtype=complex)
    for i in range(s):
        for j in range(s):
            minor = np.delete(np.delete(M, i, axis=0), j, axis=1)
            adj[j, i] = (-1) ** (i + j) * np.linalg.det(minor)
    return adj


def char_poly_shifted(t: ButcherTableau) -> PolynomialC:
    """det(I - z A) as a polynomial of degree <= s."""
    A = t.A
    s = t.s
    eye = np.eye(s)
    r = _sample_scale(A)
    c = _interp(lambda z: np.linalg.det(eye - z * A), s, r)
    p = PolynomialC(c)
    return _clean(p, r)


def _clean(p: PolynomialC, r: float, tol: float = DEGREE_TOL) -> PolynomialC:
    return p.trimmed(tol=tol, scale=r)


def stability_function(t: ButcherTableau) -> RationalFunctionC:
    """R(z) = 1 + z b^T (I - z A)^{-1} 1 as numerator / denominator.

    Uses R(z) det(I - zA) = det(I - zA + z 1 b^T).
    """
    A, b = t.A, t.b
    s = t.s
    eye = np.eye(s)
    ones_bt = np.outer(np.ones(s), b)
    r = _sample_scale(A)
    num = PolynomialC(_interp(lambda z: np.linalg.det(eye - z * A + z * ones_bt), s, r))
    return RationalFunctionC(_clean(num, r), char_poly_shifted(t))


@dataclass(frozen=True)
class Resolvent:
    """Entries of (I - zA)^{-1} and of z b^T (I - zA)^{-1} over det(I - zA)."""

    denominator: PolynomialC
    matrix_numerators: list  # s x s nested list of PolynomialC
    row_numerators: list  # length s
    scale: float

    def matrix_entry(self, i: int, j: int) -> RationalFunctionC:
        return RationalFunctionC(self.matrix_numerators[i][j], self.denominator)

    def row_entry(self, j: int) -> RationalFunctionC:
        return RationalFunctionC(self.row_numerators[j], self.denominator)


def resolvent_entries(t: ButcherTableau) -> Resolvent:
    A, b = t.A, t.b
    s = t.s
    eye = np.eye(s)
    r = _sample_scale(A)
    adj = _interp(lambda z: _adjugate(eye - z * A), max(s - 1, 0), r)
    row = _interp(lambda z: z * (b @ _adjugate(eye - z * A)), s, r)
    den = char_poly_shifted(t)
    mat = [[PolynomialC(adj[:, i, j]) for j in range(s)] for i in range(s)]
    rows = [PolynomialC(row[:, j]) for j in range(s)]
    return Resolvent(den, mat, rows, r)


# ---------------------------------------------------------------------------
# classification

@dataclass
class StabilityReport:
    A: bool
    I: bool
    AS: bool
    ASI: bool
    IS: bool
    ISI: bool
    A_hat: bool
    I_hat: bool
    witnesses: dict = field(default_factory=dict)
    numerator: list = field(default_factory=list)
    denominator: list = field(default_factory=list)
    poles: list = field(default_factory=list)

    def flags(self) -> dict:
        return {k: getattr(self, k) for k in ("A", "I", "AS", "ASI", "IS", "ISI", "A_hat", "I_hat")}

    def to_json(self) -> str:
        def enc(x):
            if isinstance(x, complex):
                return [x.real, x.imag]
            raise TypeError(type(x))

        return json.dumps(asdict(self), default=enc, indent=2)


def _scaled_max(p: PolynomialC, r: float) -> float:
    return float(np.max(np.abs(p.coeffs) * r ** np.arange(p.coeffs.size)))


def _region_violation(roots, region: str):
    """First root violating the region, with a flag telling whether it sits inside the margin."""
    for z in roots:
        margin = ROOT_MARGIN * max(1.0, abs(z))
        if region == "left":
            if z.real <= margin:
                return complex(z), abs(z.real) <= margin
        else:
            if abs(z.real) <= margin:
                return complex(z), True
    return None, False


def _bounded_entry(num: PolynomialC, den: PolynomialC, den_roots, r: float, ref: float, region: str):
    """Check that num/den is bounded on the closed left half-plane or on iR.

    Removable singularities (common roots) are cancelled first.
    Returns (ok, witness).
    """
    if _scaled_max(num, r) <= ZERO_TOL * ref:
        return True, None
    num = num.trimmed(tol=DEGREE_TOL, scale=r)
    deg_num = num.coeffs.size - 1
    deg_den = den.coeffs.size - 1
    if deg_num > deg_den:
        return False, {"kind": "unbounded at infinity", "deg_num": deg_num, "deg_den": deg_den}
    nroots = poly_roots(num) if deg_num >= 1 else np.zeros(0, complex)
    _, remaining = cancel_common_roots(nroots, den_roots)
    z, boundary = _region_violation(remaining, region)
    if z is not None:
        kind = "pole on margin (unresolved)" if boundary else "pole in region"
        return False, {"kind": kind, "pole": z}
    return True, None


def _e_polynomial(num: PolynomialC, den: PolynomialC) -> PolynomialC:
    """E(y) = |den(iy)|^2 - |num(iy)|^2 as a real polynomial in y."""
    d = den.on_imaginary_axis()
    n = num.on_imaginary_axis()
    e = d * d.conj_coeffs() - n * n.conj_coeffs()
    return PolynomialC(e.coeffs.real)


def _e_nonnegative(num: PolynomialC, den: PolynomialC, r: float):
    d = den.on_imaginary_axis()
    ref = _scaled_max(d * d.conj_coeffs(), r)
    E = _e_polynomial(num, den)
    if _scaled_max(E, r) <= E_TOL * ref:
        return True, None  # |R| = 1 on the whole imaginary axis
    E = E.trimmed(tol=E_TOL * ref / max(_scaled_max(E, r), 1e-300), scale=r)
    coeffs = E.coeffs.real
    if coeffs.size > 1:
        roots = poly_roots(E)
        real = np.sort(np.array([z.real for z in roots if abs(z.imag) <= REAL_ROOT_TOL * (1 + abs(z))]))
    else:
        real = np.zeros(0)
    span = (np.max(np.abs(real)) if real.size else 0.0) + 1.0 / r
    probes = [-2 * span, 2 * span, 0.0]
    if real.size:
        probes += list(0.5 * (real[1:] + real[:-1]))
    deg = coeffs.size - 1
    for y in probes:
        val = float(np.polyval(coeffs[::-1], y))
        tol = E_TOL * ref * (1 + abs(y * r) ** max(deg, 0))
        if val < -tol:
            return False, {"kind": "|R(iy)| > 1", "y": float(y), "E": val}
    return True, None


def classify(t: ButcherTableau) -> StabilityReport:
    """Decide A, I, AS, ASI, IS, ISI (and their hatted conjunctions)."""
    res = resolvent_entries(t)
    R = stability_function(t)
    den = res.denominator
    r = res.scale
    ref = _scaled_max(den, r)
    den_roots = poly_roots(den) if den.coeffs.size > 1 else np.zeros(0, complex)
    w = {}

    # I and A
    i_ok, wit = _e_nonnegative(R.numerator, R.denominator, r)
    if wit:
        w["I"] = wit
    a_ok = i_ok
    if not i_ok:
        w["A"] = {"kind": "not I-stable"}
    else:
        ok, wit = _bounded_entry(R.numerator, R.denominator, den_roots, r, ref, "left")
        if not ok:
            a_ok = False
            w["A"] = wit

    def all_bounded(numerators, region):
        for idx, p in numerators:
            ok, wit = _bounded_entry(p, den, den_roots, r, ref, region)
            if not ok:
                wit = dict(wit, entry=idx)
                return False, wit
        return True, None

    mat = [((i, j), res.matrix_numerators[i][j]) for i in range(t.s) for j in range(t.s)]
    row = [((j,), res.row_numerators[j]) for j in range(t.s)]
    flags = {}
    for name, entries, region in (
        ("AS", row, "left"),
        ("ASI", mat, "left"),
        ("IS", row, "imag"),
        ("ISI", mat, "imag"),
    ):
        ok, wit = all_bounded(entries, region)
        flags[name] = ok
        if wit:
            w[name] = wit

    return StabilityReport(
        A=a_ok,
        I=i_ok,
        AS=flags["AS"],
        ASI=flags["ASI"],
        IS=flags["IS"],
        ISI=flags["ISI"],
        A_hat=a_ok and flags["AS"] and flags["ASI"],
        I_hat=i_ok and flags["IS"] and flags["ISI"],
        witnesses=w,
        numerator=[complex(x) for x in R.numerator.coeffs],
        denominator=[complex(x) for x in R.denominator.coeffs],
        poles=[complex(x) for x in den_roots],
    )


# ---------------------------------------------------------------------------
# matrices: eigenvalues, Schur form, adapted norm

def spectral_norm(M: np.ndarray, tol: float = 1e-10, maxiter: int = 10_000) -> float:
    """Largest singular value by power iteration on M^H M."""
    M = np.asarray(M, dtype=complex)
    if not np.any(M):
        return 0.0
    G = M.conj().T @ M
    rng = np.random.default_rng(12345)
    x = rng.standard_normal(M.shape[1]) + 1j * rng.standard_normal(M.shape[1])
    x /= np.linalg.norm(x)
    lam = 0.0
    for _ in range(maxiter):
        y = G @ x
        new = float(np.real(np.vdot(x, y)))
        ny = np.linalg.norm(y)
        if ny == 0:
            return 0.0
        x = y / ny
        if abs(new - lam) <= tol * max(new, 1e-300):
            lam = new
            break
        lam = new
    return float(np.sqrt(max(lam, 0.0)))


def matrix_eigenvalues(M: np.ndarray, check: bool = True) -> np.ndarray:
    """Eigenvalues as roots of the interpolated characteristic polynomial."""
    M = np.asarray(M, dtype=complex)
    s = M.shape[0]
    norm = np.linalg.norm(M)
    if norm == 0:
        return np.zeros(s, dtype=complex)
    eye = np.eye(s)
    r0 = norm / np.sqrt(s)
    r = r0
    # the sampling circle is moved onto the spectrum: coefficients are only
    # well determined when r is comparable to the root moduli
    for _ in range(3):
        c = _interp(lambda z: np.linalg.det(z * eye - M), s, r)
        c[-1] = 1.0
        eig = poly_roots(PolynomialC(c))
        r_new = max(float(np.max(np.abs(eig))), 1e-8 * r0)
        if abs(r_new - r) <= 1e-3 * r:
            break
        r = r_new
    eig = np.array([_newton_det(M, z) for z in eig])
    if check:
        for z in eig:
            smin = np.linalg.svd(M - z * eye, compute_uv=False)[-1]
            if smin > 1e-8 * norm:
                raise ArithmeticError(f"eigenvalue {z} failed verification (sigma_min={smin:.3e})")
    return eig


def _newton_det(M: np.ndarray, z: complex, steps: int = 3) -> complex:
    """Newton on det(zI - M) using d/dz log det = trace((zI - M)^{-1})."""
    eye = np.eye(M.shape[0])

    def smin(x):
        return np.linalg.svd(x * eye - M, compute_uv=False)[-1]

    best, best_s = z, smin(z)
    for _ in range(steps):
        try:
            tr = np.trace(np.linalg.inv(z * eye - M))
        except np.linalg.LinAlgError:
            break
        if not np.isfinite(tr) or tr == 0:
            break
        z = z - 1.0 / tr
        sz = smin(z)
        if sz < best_s:
            best, best_s = z, sz
        else:
            break
    return best


def _householder_to_e1(v: np.ndarray) -> np.ndarray:
    """Unitary Hermitian H with H v = alpha e1."""
    m = v.size
    nv = np.linalg.norm(v)
    H = np.eye(m, dtype=complex)
    if nv == 0:
        return H
    phase = v[0] / abs(v[0]) if v[0] != 0 else 1.0
    u = v.astype(complex).copy()
    u[0] += phase * nv
    nu = np.linalg.norm(u)
    if nu == 0:
        return H
    u /= nu
    return H - 2.0 * np.outer(u, u.conj())


def schur_triangularize(M: np.ndarray):
    """Unitary U with U M U^H upper triangular, by eigenvector deflation.

    Returns (U, T). Eigenvalues appear on the diagonal of T in order of
    decreasing modulus.
    """
    M = np.asarray(M, dtype=complex)
    s = M.shape[0]
    T = M.copy()
    U = np.eye(s, dtype=complex)
    for k in range(s - 1):
        sub = T[k:, k:]
        eig = matrix_eigenvalues(sub, check=False)
        lam = eig[np.argmax(np.abs(eig))]
        _, _, vh = np.linalg.svd(sub - lam * np.eye(s - k))
        v = vh[-1].conj()
        H = _householder_to_e1(v)
        T[k:, :] = H @ T[k:, :]
        T[:, k:] = T[:, k:] @ H.conj().T
        U[k:, :] = H @ U[k:, :]
        T[k + 1:, k] = 0.0
    return U, T


def adapted_norm(D: np.ndarray, eps: float) -> np.ndarray:
    """Invertible P such that ||P D P^{-1}||_2 <= rho(D) + eps.

    P = S U where U triangularizes D unitarily and
    S = diag(1, 1/delta, ..., 1/delta^(s-1)) shrinks the strict upper
    triangle entry (i, j) by delta^(j-i). The scaling factor satisfies
    delta (2 C s^(3/2) rho + C^2 delta s^2) <= eps^2, C being the largest
    strict upper triangular modulus. When a larger delta already meets the
    bound it is preferred, since it keeps P better conditioned.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    D = np.asarray(D, dtype=complex)
    s = D.shape[0]
    if not np.any(D):
        return np.eye(s, dtype=complex)
    U, T = schur_triangularize(D)
    rho = float(np.max(np.abs(np.diag(T))))
    C = float(np.max(np.abs(np.triu(T, 1)))) if s > 1 else 0.0
    target = rho + eps
    if C == 0.0:
        return U
    a, b = C * C * s * s, 2 * C * s ** 1.5 * rho
    delta0 = (-b + np.sqrt(b * b + 4 * a * eps * eps)) / (2 * a)
    delta0 = min(delta0, 0.999)

    def build(delta):
        S = np.diag(delta ** -np.arange(s, dtype=float))
        return S @ U

    for k in range(8, -1, -1):
        delta = min(delta0 * 10.0 ** k, 0.999)
        P = build(delta)
        if spectral_norm(P @ D @ np.linalg.inv(P)) <= target:
            return P
    return build(delta0)
