import numpy as np
import pytest

from agler.errors import NotAglerPair
from agler.fixtures import INNER, STRICT_BATTERY
from agler.hilbert import (agler_residual, gram, kernel_eval_many, maxmin_check, sample_pairs, span_distance,
                           user_kernel)
from agler.poly import GaussRat, Poly, var

from conftest import disk_points, inner, kernels

z1, z2 = var(1), var(2)
ONE = Poly({(0, 0): GaussRat(1)})
R2 = 1 / np.sqrt(2)


def c(x):
    return Poly({(0, 0): GaussRat(1)}).as_float() * x


def fl(q):
    return q.as_float()


# Gram matrices ------------------------------------------------------------


def test_gram_orthonormal_monomials():
    assert np.abs(gram([[ONE], [z1]], ONE) - np.eye(2)).max() <= 1e-12
    assert np.abs(gram([[ONE], [z1], [z1 ** 2]], ONE) - np.eye(3)).max() <= 1e-12


def test_gram_of_inverse_denominator():
    # 1/(3 - z1 - z2) = sum C(a+b, a) z1^a z2^b / 3^(a+b+1), whose squared norm sums to 1/(3 sqrt 5)
    G = gram([[ONE]], 3 - z1 - z2)
    assert G.shape == (1, 1)
    assert G[0, 0].real == pytest.approx(1 / (3 * np.sqrt(5)), rel=1e-12)


def test_gram_against_series():
    from math import comb

    series = sum(comb(a + b, a) ** 2 / 9 ** (a + b + 1) for a in range(80) for b in range(80))
    assert gram([[ONE]], 3 - z1 - z2)[0, 0].real == pytest.approx(series, rel=1e-12)


def test_gram_is_hermitian_psd():
    vecs = [[ONE], [z1 + z2], [z1 * z2 - 2 * z1]]
    G = gram(vecs, 4 - z1 - z2 * z1)
    assert np.abs(G - G.conj().T).max() <= 1e-14
    assert np.linalg.eigvalsh(G).min() > 0


# canonical kernels --------------------------------------------------------


def test_monomial_canonical_kernels_closed_form():
    can = kernels("monomial_z1sq_z2")
    Z, W = disk_points(40, seed=1), disk_points(40, seed=2)
    x = Z[:, 0] * np.conj(W[:, 0])
    y = Z[:, 1] * np.conj(W[:, 1])
    want = {"G": 1 + x, "F1": x ** 2, "F2": y * (1 + x), "E1": np.ones_like(x), "E2": 1 + x}
    for label, w in want.items():
        got = kernel_eval_many(can[label], Z, W)[:, 0, 0]
        assert np.abs(got - w).max() <= 1e-10, label


@pytest.mark.parametrize("name", sorted(INNER))
def test_frame_dimensions(name):
    phi, can = inner(name), kernels(name)
    g1, g2 = phi.gdeg
    assert can["F1"].dim == can["E1"].dim == g2
    assert can["F2"].dim == can["E2"].dim == g1


@pytest.mark.parametrize("name", STRICT_BATTERY)
@pytest.mark.parametrize("j", [1, 2])
def test_E_equals_F_plus_shifted_G(name, j):
    can = kernels(name)
    Z, W = sample_pairs(60, seed=4)
    s = (1 - Z[:, j - 1] * np.conj(W[:, j - 1]))[:, None, None]
    E = kernel_eval_many(can[f"E{j}"], Z, W)
    F = kernel_eval_many(can[f"F{j}"], Z, W)
    G = kernel_eval_many(can["G"], Z, W)
    assert np.abs(E - F - s * G).max() <= 1e-9


@pytest.mark.parametrize("name", sorted(INNER))
def test_agler_identities(name):
    phi, can = inner(name), kernels(name)
    Z, W = sample_pairs(100, seed=0)
    assert agler_residual(phi, can["E1"], can["F2"], Z, W) <= 1e-8
    assert agler_residual(phi, can["F1"], can["E2"], Z, W) <= 1e-8
    assert agler_residual(phi, can["F1"], can["F2"], Z, W, G=can["G"]) <= 1e-8


@pytest.mark.parametrize("name", sorted(INNER))
def test_frames_are_orthonormal(name):
    phi = inner(name)
    for label, k in kernels(name).items():
        if k.dim:
            G = gram(k.frame, phi.p, phi.torus_zeros)
            assert np.abs(G - np.eye(k.dim)).max() <= 1e-7, label


def test_example_10_1_E_and_F_spans_agree():
    can = kernels("example_10_1")
    assert can["G"].dim == 0
    for j in (1, 2):
        assert span_distance(can[f"E{j}"], can[f"F{j}"], (2, 1)) <= 1e-10


def test_monomial_E_and_F_spans_differ():
    can = kernels("monomial_z1sq_z2")
    assert span_distance(can["E1"], can["F1"], (2, 1)) > 0.5


# user kernels and the max/min characterization ---------------------------


def test_example_10_1_user_kernels():
    phi = inner("example_10_1")
    p = fl(ONE)
    A2 = user_kernel([[fl(z1) * R2, c(R2)], [c(1.0), Poly({})]], p)
    A1 = user_kernel([[fl(z1) * -R2, c(R2)]], p)
    Z, W = sample_pairs(100, seed=0)
    assert agler_residual(phi, A1, A2, Z, W) <= 1e-10


def skew_pair():
    """A non-orthogonal Agler pair for z1^2 z2."""
    p = fl(ONE)
    skew_A1 = user_kernel([[fl(1 + z1) * 0.5], [fl(z1 * (1 - z1)) * 0.5]], p)
    skew_A2 = user_kernel([[c(R2)], [fl(z1 * z2) * R2], [fl(1 - z1) * 0.5], [fl(z2 * (1 + z1)) * 0.5]], p)
    return skew_A1, skew_A2


def test_maxmin_canonical_pairs():
    phi, can = inner("monomial_z1sq_z2"), kernels("monomial_z1sq_z2")
    pts = disk_points(12, seed=7, radius=0.9)
    for A1, A2 in ((can["E1"], can["F2"]), (can["F1"], can["E2"])):
        rep = maxmin_check(phi, A1, A2, can, pts)
        assert rep["psd"] and rep["sum_matches_G"] and rep["rank_bounds"]


def test_maxmin_non_orthogonal_pair():
    phi, can = inner("monomial_z1sq_z2"), kernels("monomial_z1sq_z2")
    A1, A2 = skew_pair()
    rep = maxmin_check(phi, A1, A2, can, disk_points(12, seed=8, radius=0.9))
    assert rep["agler_residual"] <= 1e-10
    assert rep["psd"] and rep["sum_matches_G"]
    assert rep["rank_A1"] >= 1 and rep["rank_A2"] >= 2


def test_maxmin_convex_combination():
    # a mix of the two canonical pairs and the skew pair is again an Agler pair
    phi, can = inner("monomial_z1sq_z2"), kernels("monomial_z1sq_z2")
    S1, S2 = skew_pair()
    w = np.sqrt(1 / 3)
    p = fl(ONE)

    def mix(*ks):
        return user_kernel([[q * w for q in col] for k in ks for col in k.frame], p)

    A1 = mix(can["E1"], can["F1"], S1)
    A2 = mix(can["F2"], can["E2"], S2)
    rep = maxmin_check(phi, A1, A2, can, disk_points(12, seed=9, radius=0.9))
    assert rep["agler_residual"] <= 1e-10 and rep["psd"] and rep["sum_matches_G"]


def test_maxmin_rejects_non_pair():
    phi, can = inner("monomial_z1sq_z2"), kernels("monomial_z1sq_z2")
    with pytest.raises(NotAglerPair):
        maxmin_check(phi, can["F1"], can["F2"], can, disk_points(5))
