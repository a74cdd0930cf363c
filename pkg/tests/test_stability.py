import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from linimp.stability import (
    adapted_norm,
    classify,
    matrix_eigenvalues,
    resolvent_entries,
    schur_triangularize,
    spectral_norm,
    stability_function,
)
from linimp.tableau import collocation_tableau, registry, registry_names


def R_direct(t, z):
    """1 + z b^T (I - z A)^{-1} 1 by a dense solve."""
    s = t.s
    return 1 + z * t.b @ np.linalg.solve(np.eye(s) - z * t.A, np.ones(s))


def test_gauss2_pade():
    R = stability_function(registry("gauss2"))
    for z in (-1.0, 0.3 + 2j, -5 - 1j):
        pade = (1 + z / 2 + z * z / 12) / (1 - z / 2 + z * z / 12)
        assert abs(R(z) - pade) < 1e-12


def test_trapezoid_cayley():
    R = stability_function(registry("trapezoid2"))
    z = -0.7 + 1.3j
    assert abs(R(z) - (1 + z / 2) / (1 - z / 2)) < 1e-13


@pytest.mark.parametrize("name", registry_names())
def test_stability_function_matches_dense_solve(name, rng):
    t = registry(name)
    R = stability_function(t)
    for z in rng.standard_normal(8) * 3 + 3j * rng.standard_normal(8):
        ref = R_direct(t, z)
        assert abs(R(z) - ref) <= 1e-9 * max(1.0, abs(ref))


@pytest.mark.parametrize("name", registry_names())
def test_degree_bounds_and_normalisation(name):
    t = registry(name)
    R = stability_function(t)
    assert R.numerator.degree <= t.s and R.denominator.degree <= t.s
    assert abs(R.numerator.coeffs[0] - 1) < 1e-12
    assert abs(R.denominator.coeffs[0] - 1) < 1e-12


@pytest.mark.parametrize("name", registry_names())
def test_resolvent_entries_match_dense_inverse(name, rng):
    t = registry(name)
    res = resolvent_entries(t)
    z = -0.4 + 0.9j
    inv = np.linalg.inv(np.eye(t.s) - z * t.A)
    for i in range(t.s):
        for j in range(t.s):
            assert abs(res.matrix_entry(i, j)(z) - inv[i, j]) < 1e-9 * max(1, abs(inv[i, j]))
    row = z * t.b @ inv
    for j in range(t.s):
        assert abs(res.row_entry(j)(z) - row[j]) < 1e-9 * max(1, abs(row[j]))


EXPECTED = {
    "gauss2": dict(A=True, I=True, AS=True, ASI=True, IS=True, ISI=True, A_hat=True, I_hat=True),
    "trapezoid2": dict(A=True, I=True, AS=True, ASI=True, A_hat=True),
    "nonAstable2": dict(A=False, I=False),
    "lobatto4uniform": dict(A=True, AS=True, ASI=True, A_hat=True),
    "fiveStageNotASI": dict(A=True, AS=True, ASI=False, A_hat=False),
    "fiveStageInotA": dict(A=False, I=True),
}


@pytest.mark.parametrize("name", registry_names())
def test_classification(name):
    flags = classify(registry(name)).flags()
    for k, v in EXPECTED[name].items():
        assert flags[k] is v, (name, k, flags)


@pytest.mark.parametrize("name", registry_names())
def test_implication_chain(name):
    f = classify(registry(name)).flags()
    assert (not f["A"]) or f["I"]
    assert (not f["AS"]) or f["IS"]
    assert (not f["ASI"]) or f["ISI"]
    assert f["A_hat"] == (f["A"] and f["AS"] and f["ASI"])
    assert f["I_hat"] == (f["I"] and f["IS"] and f["ISI"])


@pytest.mark.parametrize("name", registry_names())
def test_a_stability_sampling_cross_check(name, rng):
    t = registry(name)
    rep = classify(t)
    R = stability_function(t)
    mag = 10.0 ** rng.uniform(-3, 3, 1000)
    ang = rng.uniform(np.pi / 2, 3 * np.pi / 2, 1000)
    lam = mag * np.exp(1j * ang)
    lam[:50] = 1j * lam[:50].imag  # boundary of the closed half plane
    vals = np.abs(R(lam))
    if rep.A:
        assert np.all(vals <= 1 + 1e-9)
    if rep.I:
        assert np.all(np.abs(R(1j * lam.imag)) <= 1 + 1e-9)


def test_witness_for_non_a_stable():
    rep = classify(registry("nonAstable2"))
    w = rep.witnesses["I"]
    y = w["y"]
    assert abs(stability_function(registry("nonAstable2"))(1j * y)) > 1


def test_witness_for_not_asi():
    rep = classify(registry("fiveStageNotASI"))
    pole = rep.witnesses["ASI"]["pole"]
    assert pole.real <= 1e-9
    # the pole is a root of det(I - z A)
    t = registry("fiveStageNotASI")
    assert np.linalg.svd(np.eye(5) - pole * t.A, compute_uv=False)[-1] < 1e-6


def test_report_json_roundtrip():
    data = json.loads(classify(registry("trapezoid2")).to_json())
    assert data["A"] is True and isinstance(data["poles"][0], list)


def test_explicit_euler_not_a_stable():
    t = collocation_tableau([0.0])
    assert classify(t).A is False


def test_matrix_eigenvalues_against_lapack(rng):
    for s in range(1, 7):
        M = rng.standard_normal((s, s)) + 1j * rng.standard_normal((s, s))
        ours = np.sort_complex(matrix_eigenvalues(M))
        lapack = np.sort_complex(np.linalg.eigvals(M))
        # greedy match
        left = list(lapack)
        for z in ours:
            k = int(np.argmin(np.abs(np.array(left) - z)))
            assert abs(left.pop(k) - z) < 1e-9 * max(1.0, np.linalg.norm(M))


def test_spectral_norm_against_svd(rng):
    M = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
    assert abs(spectral_norm(M, tol=1e-14) - np.linalg.svd(M, compute_uv=False)[0]) < 1e-8


def test_schur_triangularize(rng):
    M = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    U, T = schur_triangularize(M)
    np.testing.assert_allclose(U @ U.conj().T, np.eye(4), atol=1e-12)
    np.testing.assert_allclose(U @ M @ U.conj().T, T, atol=1e-10)
    assert np.max(np.abs(np.tril(T, -1))) < 1e-10


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 5), st.floats(0.01, 0.5), st.integers(0, 10_000))
def test_adapted_norm_bound(s, eps, seed):
    r = np.random.default_rng(seed)
    D = r.standard_normal((s, s)) + 1j * r.standard_normal((s, s))
    D *= 0.9 / np.max(np.abs(np.linalg.eigvals(D)))
    P = adapted_norm(D, eps)
    rho = np.max(np.abs(np.linalg.eigvals(D)))
    assert spectral_norm(P @ D @ np.linalg.inv(P), tol=1e-10) <= rho + eps + 1e-9
