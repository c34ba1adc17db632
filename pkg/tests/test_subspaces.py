import numpy as np
import pytest

from agler.fixtures import STRICT_BATTERY, monomial
from agler.inner import validate
from agler.poly import GaussRat, Poly, poly_divide, var
from agler.subspaces import IN, OUT, basis, dims_check, l2_membership, monomial_oracle

from conftest import inner

z1, z2 = var(1), var(2)
ONE = Poly({(0, 0): GaussRat(1)})

# Fourier-support windows: after multiplication by conj(phi), members of K, K1, K2 live in
# the anti-analytic quadrants (<= -1, <= -1), (<= 0, <= -1), (<= -1, <= 0).
SHIFT = {"K": (-1, -1), "K1": (0, -1), "K2": (-1, 0)}


def support_oracle(m, n, which, box=6):
    """Monomials z^k in H^2 with conj(z1^m z2^n) z^k in the required quadrant."""
    a, b = SHIFT[which]
    return sorted((j, k) for j in range(box) for k in range(box) if j - m <= a and k - n <= b)


def span_projector(monos, box):
    """Projector onto the span of the given monomials in a dense (box+1)^2 coefficient space."""
    P = np.zeros(((box[0] + 1) * (box[1] + 1),) * 2)
    for j, k in monos:
        i = j * (box[1] + 1) + k
        P[i, i] = 1
    return P


def test_monomial_bases_closed_form():
    phi = inner("monomial_z1sq_z2")
    b = {w: basis(phi, w) for w in ("K", "K1", "K2")}
    assert [str(v[0]) for v in b["K"].numerators] == ["1", "z1"]
    assert sorted(str(v[0]) for v in b["K2"].numerators) == sorted(["1", "z1", "z2", "z1 z2"])
    assert b["K1"].dim == 3


@pytest.mark.parametrize("m", range(1, 5))
@pytest.mark.parametrize("n", range(1, 5))
def test_monomial_oracle_sweep(m, n):
    phi = validate(*monomial(m, n))
    box = (m, n)
    for w in ("K", "K1", "K2"):
        B = basis(phi, w)
        want = support_oracle(m, n, w)
        assert sorted(monomial_oracle(m, n, w)) == want
        assert np.abs(B.coefficient_projector(box) - span_projector(want, box)).max() <= 1e-10
    rep = dims_check(phi)
    assert rep.match and (rep.dim_K1_minus_K, rep.dim_K2_minus_K) == (n, m)


def test_example_10_1_has_trivial_K():
    phi = inner("example_10_1")
    assert basis(phi, "K").dim == 0
    rep = dims_check(phi)
    assert (rep.dim_K1, rep.dim_K2) == (1, 2) and rep.match


def test_boundary_scalar_K_is_trivial():
    phi = inner("boundary_scalar")
    assert basis(phi, "K").dim == 0
    assert basis(phi, "K1").dim == 1 and basis(phi, "K2").dim == 1


def test_diagonal_example_dimensions():
    phi = inner("diagonal")
    K = basis(phi, "K")
    assert K.dim == 5
    # first component constant, second component divisible by p with quotient of degree <= (1, 1)
    p = 3 - z1 - z2
    for q1, q2 in K.numerators:
        assert q1.is_zero or q1.degree == (0, 0)
        if not q2.is_zero:
            r, res = poly_divide(q2.as_float(), p.as_float())
            assert res <= 1e-9
            assert all(d <= 1 for d in r.degree)
    rep = dims_check(phi)
    assert (rep.dim_K, rep.dim_K1_minus_K, rep.dim_K2_minus_K) == (5, 3, 3) and rep.match


def test_l2_membership_examples():
    p = 2 - z1 - z2
    assert l2_membership(ONE, p) == OUT
    assert l2_membership(p, p) == IN
    assert l2_membership(ONE, 3 - z1 - z2) == IN


@pytest.mark.parametrize("name", STRICT_BATTERY + ["boundary_scalar"])
def test_divisibility_residual_and_nesting(name):
    phi = inner(name)
    b = {w: basis(phi, w) for w in ("K", "K1", "K2")}
    assert b["K"].dim <= b["K1"].dim and b["K"].dim <= b["K2"].dim
    Qt, p = phi.Qt.as_float(), phi.p.as_float()
    for w, B in b.items():
        for q, r in zip(B.numerators, B.r_parts):
            for i in range(phi.N):
                lhs = Poly({})
                for j in range(phi.N):
                    lhs = lhs + Qt.entries[i][j] * q[j].as_float()
                res = (lhs - p * r[i].as_float()).max_coeff()
                assert res <= 1e-9 * max(1.0, max(x.max_coeff() for x in q))


@pytest.mark.parametrize("name", STRICT_BATTERY)
def test_dimension_formula_strict(name):
    assert dims_check(inner(name)).match


@pytest.mark.parametrize("name", STRICT_BATTERY)
def test_basis_is_deterministic(name):
    phi = inner(name)
    for w in ("K", "K1", "K2"):
        a, b = basis(phi, w), basis(phi, w)
        box = a.degree_bound
        if a.dim:
            assert np.abs(a.coefficient_projector(box) - b.coefficient_projector(box)).max() <= 1e-12


@pytest.mark.parametrize("m,n", [(1, 1), (2, 1), (1, 3)])
def test_exact_matches_float(m, n):
    ex, fl = validate(*monomial(m, n)), validate(*[x.as_float() for x in monomial(m, n)])
    for w in ("K", "K1", "K2"):
        a, b = basis(ex, w, exact=True), basis(fl, w, exact=False)
        assert a.dim == b.dim
        assert np.abs(a.coefficient_projector((m, n)) - b.coefficient_projector((m, n))).max() <= 1e-10
