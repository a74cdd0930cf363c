"""Collocation Runge--Kutta tableaux.

Tableaux are built from their nodes by integrating the Lagrange basis in
monomial form. When every node is rational (``int`` or
:class:`fractions.Fraction`) the construction is carried out in exact
rational arithmetic and only converted to floats at the end.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import sqrt
from numbers import Rational
from typing import Sequence

import numpy as np

from .errors import DegenerateNodes, UnknownMethod

NODE_GAP = 1e-12


@dataclass(frozen=True)
class LagrangePoly:
    """Lagrange basis polynomial ``l_i`` stored by ascending monomial coefficients."""

    index: int
    coeffs: tuple

    def __call__(self, tau):
        out = 0 * tau
        for a in reversed(self.coeffs):
            out = out * tau + a
        return out

    def integral(self, lo, hi):
        """Exact antiderivative evaluated between ``lo`` and ``hi``."""
        total = 0
        for k, a in enumerate(self.coeffs):
            total = total + a * (hi ** (k + 1) - lo ** (k + 1)) / (k + 1)
        return total


@dataclass(frozen=True)
class ButcherTableau:
    c: np.ndarray
    A: np.ndarray
    b: np.ndarray
    name: str = ""
    exact: tuple | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        for attr in ("c", "A", "b"):
            arr = np.array(getattr(self, attr), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, attr, arr)
        s = self.c.shape[0]
        if self.A.shape != (s, s) or self.b.shape != (s,):
            raise ValueError("inconsistent tableau shapes")

    @property
    def s(self) -> int:
        return self.c.shape[0]

    def quadrature_defect(self) -> float:
        """max_k |sum_i b_i c_i^(k-1) - 1/k| for k = 1..s."""
        k = np.arange(1, self.s + 1)
        lhs = (self.b[None, :] * self.c[None, :] ** (k[:, None] - 1)).sum(axis=1)
        return float(np.max(np.abs(lhs - 1.0 / k)))

    def row_sum_defect(self) -> float:
        return float(np.max(np.abs(self.A.sum(axis=1) - self.c)))

    def to_text(self, digits: int = 12) -> str:
        width = digits + 8
        lines = []
        for i in range(self.s):
            row = "".join(f"{x:>{width}.{digits}g}" for x in self.A[i])
            lines.append(f"{self.c[i]:>{width}.{digits}g} |{row}")
        lines.append(" " * width + "-+" + "-" * (width * self.s))
        lines.append(" " * width + " |" + "".join(f"{x:>{width}.{digits}g}" for x in self.b))
        return "\n".join(lines)

    def to_csv(self) -> str:
        rows = ["i,j,a_ij"]
        for i in range(self.s):
            for j in range(self.s):
                rows.append(f"{i + 1},{j + 1},{float(self.A[i, j])!r}")
        rows.append("b," + ",".join(repr(float(x)) for x in self.b))
        return "\n".join(rows) + "\n"


def _is_exact(nodes) -> bool:
    return all(isinstance(x, Rational) for x in nodes)


def _check_distinct(nodes) -> None:
    vals = [float(x) for x in nodes]
    for i in range(len(vals)):
        for j in range(i):
            if abs(vals[i] - vals[j]) <= NODE_GAP:
                raise DegenerateNodes(f"nodes {i} and {j} coincide ({vals[i]!r})")


def _poly_mul_linear(coeffs, root, scale):
    # coeffs * (tau - root) / scale
    out = [0] * (len(coeffs) + 1)
    for k, a in enumerate(coeffs):
        out[k + 1] += a / scale
        out[k] -= a * root / scale
    return out


def lagrange_basis(c: Sequence) -> list[LagrangePoly]:
    """Lagrange polynomials at the nodes ``c`` in monomial form.

    Exact (``Fraction``) coefficients are returned when all nodes are rational.
    """
    nodes = list(c)
    _check_distinct(nodes)
    if _is_exact(nodes):
        nodes = [Fraction(x) for x in nodes]
        one = Fraction(1)
    else:
        nodes = [float(x) for x in nodes]
        one = 1.0
    basis = []
    for i, ci in enumerate(nodes):
        coeffs = [one]
        for j, cj in enumerate(nodes):
            if j != i:
                coeffs = _poly_mul_linear(coeffs, cj, ci - cj)
        basis.append(LagrangePoly(i, tuple(coeffs)))
    return basis


def collocation_tableau(c: Sequence, name: str = "") -> ButcherTableau:
    """Collocation tableau with a_ij = int_0^{c_i} l_j and b_i = int_0^1 l_i."""
    nodes = list(c)
    basis = lagrange_basis(nodes)
    s = len(nodes)
    if _is_exact(nodes):
        nodes = [Fraction(x) for x in nodes]
        zero, one = Fraction(0), Fraction(1)
    else:
        nodes = [float(x) for x in nodes]
        zero, one = 0.0, 1.0
    A = [[basis[j].integral(zero, nodes[i]) for j in range(s)] for i in range(s)]
    b = [basis[i].integral(zero, one) for i in range(s)]
    exact = (tuple(nodes), tuple(map(tuple, A)), tuple(b)) if isinstance(zero, Fraction) else None
    return ButcherTableau(
        c=[float(x) for x in nodes],
        A=[[float(x) for x in row] for row in A],
        b=[float(x) for x in b],
        name=name,
        exact=exact,
    )


def cooper_defect(t: ButcherTableau) -> float:
    """max_ij |b_i b_j - b_i a_ij - b_j a_ji|; zero for quadratic-invariant preserving methods."""
    b, A = t.b, t.A
    M = np.outer(b, b) - b[:, None] * A - (b[:, None] * A).T
    return float(np.max(np.abs(M)))


# ---------------------------------------------------------------------------
# named methods, typed from their closed forms

def _gauss2():
    r = sqrt(3) / 6
    return ButcherTableau(
        c=[0.5 - r, 0.5 + r],
        A=[[0.25, 0.25 - r], [0.25 + r, 0.25]],
        b=[0.5, 0.5],
        name="gauss2",
    )


def _trapezoid2():
    return ButcherTableau(c=[0, 1], A=[[0, 0], [0.5, 0.5]], b=[0.5, 0.5], name="trapezoid2")


def _non_a_stable2():
    return ButcherTableau(
        c=[1 / 4, 1 / 3],
        A=[[5 / 8, -3 / 8], [2 / 3, -1 / 3]],
        b=[-2, 3],
        name="nonAstable2",
    )


def _lobatto4_uniform():
    return ButcherTableau(
        c=[0, 1 / 3, 2 / 3, 1],
        A=[
            [0, 0, 0, 0],
            [1 / 8, 19 / 72, -5 / 72, 1 / 72],
            [1 / 9, 4 / 9, 1 / 9, 0],
            [1 / 8, 3 / 8, 3 / 8, 1 / 8],
        ],
        b=[1 / 8, 3 / 8, 3 / 8, 1 / 8],
        name="lobatto4uniform",
    )


def _five_stage_not_asi():
    r7 = sqrt(7)
    km2 = (7 - r7) ** 2
    kp2 = (7 + r7) ** 2
    A = [
        [3259 / 1440, -1421 / 720 - 21 * r7 / 64, 163 / 120, -1421 / 720 + 21 * r7 / 64, 829 / 1440],
        [
            km2 * (281 * r7 + 1120) / 15435,
            -343 / 180 - 107 * r7 / 315,
            km2 * (106 * r7 + 455) / 10290,
            -km2 * (97 * r7 + 770) / 17640,
            km2 * (71 * r7 + 280) / 15435,
        ],
        [203 / 90, -343 / 180 - 7 * r7 / 24, 22 / 15, -343 / 180 + 7 * r7 / 24, 53 / 90],
        [
            -kp2 * (281 * r7 - 1120) / 15435,
            kp2 * (97 * r7 - 770) / 17640,
            -kp2 * (106 * r7 - 455) / 10290,
            -343 / 180 + 107 * r7 / 315,
            -kp2 * (71 * r7 - 280) / 15435,
        ],
        [363 / 160, -147 / 80 - 21 * r7 / 64, 63 / 40, -147 / 80 + 21 * r7 / 64, 93 / 160],
    ]
    return ButcherTableau(
        c=[1 / 4, 0.5 - r7 / 14, 0.5, 0.5 + r7 / 14, 3 / 4],
        A=A,
        b=[128 / 45, -343 / 90, 44 / 15, -343 / 90, 128 / 45],
        name="fiveStageNotASI",
    )


def _five_stage_i_not_a():
    F = Fraction
    A = [
        [F(4453, 2400), F(-4347, 1600), F(221, 120), F(-1917, 1600), F(1123, 2400)],
        [F(3824, 2025), F(-133, 50), F(742, 405), F(-179, 150), F(944, 2025)],
        [F(281, 150), F(-513, 200), F(29, 15), F(-243, 200), F(71, 150)],
        [F(3808, 2025), F(-194, 75), F(824, 405), F(-28, 25), F(928, 2025)],
        [F(1503, 800), F(-4131, 1600), F(81, 40), F(-1701, 1600), F(393, 800)],
    ]
    b = [F(176, 75), F(-189, 50), F(58, 15), F(-189, 50), F(176, 75)]
    return ButcherTableau(
        c=[1 / 4, 1 / 3, 1 / 2, 2 / 3, 3 / 4],
        A=[[float(x) for x in row] for row in A],
        b=[float(x) for x in b],
        name="fiveStageInotA",
    )


_REGISTRY = {
    "gauss2": _gauss2,
    "trapezoid2": _trapezoid2,
    "nonAstable2": _non_a_stable2,
    "lobatto4uniform": _lobatto4_uniform,
    "fiveStageNotASI": _five_stage_not_asi,
    "fiveStageInotA": _five_stage_i_not_a,
}

# Node sets in the most exact form available, for collocation_tableau.
REGISTRY_NODES = {
    "gauss2": (0.5 - sqrt(3) / 6, 0.5 + sqrt(3) / 6),
    "trapezoid2": (Fraction(0), Fraction(1)),
    "nonAstable2": (Fraction(1, 4), Fraction(1, 3)),
    "lobatto4uniform": (Fraction(0), Fraction(1, 3), Fraction(2, 3), Fraction(1)),
    "fiveStageNotASI": (0.25, 0.5 - sqrt(7) / 14, 0.5, 0.5 + sqrt(7) / 14, 0.75),
    "fiveStageInotA": (Fraction(1, 4), Fraction(1, 3), Fraction(1, 2), Fraction(2, 3), Fraction(3, 4)),
}


def registry_names() -> list[str]:
    return list(_REGISTRY)


def registry(name: str) -> ButcherTableau:
    """Return one of the named registry tableaux."""
    try:
        return _REGISTRY[name]()
    except KeyError:
        raise UnknownMethod(f"unknown method {name!r}; known: {', '.join(_REGISTRY)}") from None


def parse_nodes(text: str) -> list:
    """Parse ``"0,1/3,2/3,1"`` into exact fractions where possible."""
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        try:
            out.append(Fraction(tok))
        except ValueError:
            out.append(float(tok))
    return out
