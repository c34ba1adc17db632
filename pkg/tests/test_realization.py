import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from agler.errors import ValidationFailed
from agler.fixtures import STRICT_BATTERY
from agler.inner import validate
from agler.poly import MatPoly, const
from agler.realization import (eval_transfer, haar_unitary, realization_from_json, realize, sobol_points,
                               synthesize, transfer_residual)

from conftest import disk_points, inner, torus_points


def test_constant_unitary_has_no_state():
    U0 = np.array([[0.6, 0.8j], [0.8j, 0.6]])
    phi = validate(MatPoly([[const(complex(x)) for x in row] for row in U0]), const(1.0))
    r = realize(phi)
    assert r.size == 2 and np.abs(r.U - U0).max() <= 1e-12


def test_monomial_realization():
    phi = inner("monomial_z1sq_z2")
    r = realize(phi)
    assert r.U.shape == (4, 4) and (r.d1, r.d2) == (2, 1)
    Z = disk_points(50, seed=11)
    assert transfer_residual(r, phi, Z) <= 1e-9
    assert eval_transfer(r, (0.5, 1 / 3))[0, 0] == pytest.approx(1 / 12, abs=1e-12)


def test_example_10_1_realization():
    phi = inner("example_10_1")
    r = realize(phi)
    assert r.U.shape == (5, 5)
    assert r.residuals["transfer"] <= 1e-8


def test_raw_realizes_the_transpose():
    phi = inner("example_10_1")
    raw = realize(phi, raw=True)
    Z = disk_points(20, seed=2)
    assert raw.raw and transfer_residual(raw, phi, Z) <= 1e-8
    assert np.abs(raw.transpose().U - realize(phi).U).max() <= 1e-12


def test_eval_at_origin_is_A():
    r = realize(inner("degree_21_scalar"))
    assert np.abs(eval_transfer(r, (0, 0)) - r.A).max() == 0


def test_random_unitary_is_inner_on_torus():
    rng = np.random.default_rng(3)
    U = haar_unitary(3, rng)
    r = realization_from_json({"N": 1, "d": [1, 1],
                               "U": [[{"re": x.real, "im": x.imag} for x in row] for row in U]})
    for z in torus_points(20, seed=4):
        assert abs(abs(eval_transfer(r, z)[0, 0]) - 1) <= 1e-10


def test_synthesize_identity_is_one():
    phi = synthesize(np.eye(3), 1, 1, 1)
    assert phi.gdeg == (0, 0)
    for z in disk_points(10):
        assert phi(*z)[0, 0] == pytest.approx(1, abs=1e-12)


def test_synthesize_swap_is_z1():
    phi = synthesize(np.array([[0, 1], [1, 0]]), 1, 1, 0)
    for z in disk_points(10):
        assert phi(*z)[0, 0] == pytest.approx(z[0], abs=1e-12)


def test_synthesize_rejects_non_unitary():
    with pytest.raises(ValidationFailed):
        synthesize(np.diag([1.0, 0.5]), 1, 1, 0)


def test_synthesize_haar_degree_bound():
    U = haar_unitary(4, np.random.default_rng(9))
    phi = synthesize(U, 2, 1, 1)
    assert phi.gdeg[0] <= 1 and phi.gdeg[1] <= 1


@pytest.mark.parametrize("name", STRICT_BATTERY)
def test_round_trip_strict_battery(name):
    phi = inner(name)
    r = realize(phi)
    assert r.residuals["unitarity"] <= 1e-8
    assert r.residuals["certificate"] <= 1e-7
    back = synthesize(r.U, r.N, r.d1, r.d2)
    Z = sobol_points(100, seed=5)
    err = max(np.abs(back(*z) - phi(*z)).max() for z in Z)
    assert err <= 1e-7


def test_realization_json_round_trip():
    r = realize(inner("monomial_z1sq_z2"))
    back = realization_from_json(r.to_json())
    assert (back.N, back.d1, back.d2) == (r.N, r.d1, r.d2)
    assert np.abs(back.U - r.U).max() == 0


def test_realize_is_deterministic():
    a, b = realize(inner("example_10_1"), seed=3), realize(inner("example_10_1"), seed=3)
    assert np.array_equal(a.U, b.U)


SHAPES = [(N, a, b) for N in (1, 2) for a in (0, 1, 2) for b in (0, 1, 2)]


@settings(max_examples=12, deadline=None)
@given(st.sampled_from(SHAPES), st.integers(0, 2 ** 16))
def test_minimal_size_round_trip(shape, seed):
    N, d1, d2 = shape
    phi = synthesize(haar_unitary(N + d1 + d2, np.random.default_rng(seed)), N, d1, d2)
    r = realize(phi)
    assert r.size == N + sum(phi.gdeg)
    assert r.residuals["unitarity"] <= 1e-8
    assert r.residuals["transfer"] <= 1e-7
    if phi.gdeg == (d1, d2):
        assert r.size == N + d1 + d2
