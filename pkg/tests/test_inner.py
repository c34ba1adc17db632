import json
import os

import numpy as np
import pytest

from agler.errors import NotInner, PoleHit, SchemaError, UnstableDenominator, ZeroDenominator
from agler.fixtures import INNER, example_10_1, monomial
from agler.inner import BOUNDARY, STRICT, eval_exterior, evaluate, from_json, validate
from agler.poly import MatPoly, Poly, var

from conftest import inner, torus_points

z1, z2 = var(1), var(2)
FIXTURES = os.path.join(os.path.dirname(__file__), "..", "fixtures")


def test_monomial_is_strict_inner():
    phi = validate(*monomial(2, 1))
    assert phi.stability == STRICT and phi.d == (2, 1)
    assert str(phi.g_tilde) == "z1^2 z2" and str(phi.g) == "1"


def test_example_10_1_det_fraction():
    phi = validate(*example_10_1())
    assert phi.d == (2, 1)
    assert phi.g_tilde == z1 ** 2 * z2 and phi.g == Poly({(0, 0): 1}).as_exact()


def test_not_inner():
    Q = MatPoly([[z1, Poly({(0, 0): 1}).as_exact()], [Poly({}), z2]])
    with pytest.raises(NotInner) as info:
        validate(Q, Poly({(0, 0): 1}).as_exact())
    assert info.value.exit_code == 2


def test_unstable_denominator_rejected():
    p = 1 - 2 * z1
    with pytest.raises(UnstableDenominator):
        validate(MatPoly([[z1 - 2]]), p)


def test_zero_denominator():
    with pytest.raises(ZeroDenominator):
        validate(MatPoly([[z1]]), Poly({}))


def test_boundary_scalar_flagged():
    phi = inner("boundary_scalar")
    assert phi.stability == BOUNDARY
    assert len(phi.torus_zeros) == 1
    assert np.allclose(np.exp(1j * np.array(phi.torus_zeros[0])), [1, 1], atol=1e-6)


def test_evaluate_examples():
    assert evaluate(inner("monomial_z1sq_z2"), (0.5, 0.5))[0, 0] == pytest.approx(1 / 8)
    assert np.abs(evaluate(inner("example_10_1"), (0, 0))).max() == 0
    assert evaluate(inner("strict_scalar"), (0, 0))[0, 0] == 0


def test_pole_hit_at_torus_zero():
    with pytest.raises(PoleHit):
        inner("boundary_scalar")(1.0, 1.0)


def test_eval_exterior_examples():
    assert eval_exterior(inner("monomial_z1sq_z2"), (2, 2))[0, 0] == pytest.approx(8)
    phi = inner("example_10_1")
    Q = phi.Q(2.0, 3.0)
    assert np.abs(eval_exterior(phi, (2, 3)) - Q).max() <= 1e-10
    far = eval_exterior(inner("monomial_z1sq_z2"), (1.0000001e6, 2))[0, 0]
    assert far == pytest.approx(1.0000001e6 ** 2 * 2, rel=1e-6)


@pytest.mark.parametrize("name", sorted(INNER))
def test_unitary_on_torus(name):
    phi = inner(name)
    Z = torus_points(200, seed=3)
    if phi.torus_zeros:
        keep = np.abs(phi.p(Z[:, 0], Z[:, 1])) > 1e-3
        Z = Z[keep]
    V = phi(Z[:, 0], Z[:, 1])
    err = np.abs(np.conj(np.swapaxes(V, 1, 2)) @ V - np.eye(phi.N)).max()
    assert err <= 1e-8
    g = phi.g.as_float()(Z[:, 0], Z[:, 1])
    d = np.abs(np.linalg.det(V))[np.abs(g) > 1e-6]
    assert np.all(np.abs(d - 1) <= 1e-8)


@pytest.mark.parametrize("name", sorted(INNER))
def test_exterior_consistency(name):
    phi = inner(name)
    r = np.random.default_rng(5)
    for _ in range(10):
        z = 1.5 * np.exp(2j * np.pi * r.random(2))
        ext = eval_exterior(phi, z)
        # phi(z) phi(1/conj z)^* = I on the exterior
        inner_val = phi(1 / np.conj(z[0]), 1 / np.conj(z[1]))
        assert np.abs(ext @ inner_val.conj().T - np.eye(phi.N)).max() <= 1e-10
        if phi.p.as_float()(*z) != 0:
            direct = phi.Q.as_float()(*z) / phi.p.as_float()(*z)
            assert np.abs(ext - direct).max() <= 1e-8 * max(1.0, np.abs(direct).max())


@pytest.mark.parametrize("name", [n for n in sorted(INNER) if n != "boundary_scalar"])
def test_strict_denominator_margin(name):
    phi = inner(name)
    assert phi.stability == STRICT
    assert phi.min_modulus > 1e-6


@pytest.mark.parametrize("name", sorted(INNER))
def test_exact_and_float_agree(name):
    a, b = inner(name, exact=True), inner(name)
    assert a.gdeg == b.gdeg and a.stability == b.stability


@pytest.mark.parametrize("fn", sorted(os.listdir(FIXTURES)))
def test_fixture_files_load(fn):
    obj = json.load(open(os.path.join(FIXTURES, fn)))
    if "Q" in obj:
        phi = from_json(obj)
        assert phi.N == obj["N"]


def test_from_json_schema_errors():
    with pytest.raises(SchemaError):
        from_json({"Q": {}})
    with pytest.raises(SchemaError):
        from_json([])
    obj = json.load(open(os.path.join(FIXTURES, "strict_scalar.json")))
    obj["d"] = [1]
    with pytest.raises(SchemaError):
        from_json(obj)
