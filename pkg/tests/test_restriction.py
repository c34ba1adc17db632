import numpy as np
import pytest

from agler.errors import ExceptionalSlice
from agler.fixtures import STRICT_BATTERY
from agler.restriction import SPACES, is_exceptional, onevar_model_dim, random_torus_points, slice_isometry

from conftest import inner, kernels


def test_monomial_slice_at_one():
    phi = inner("monomial_z1sq_z2")
    s = slice_isometry(phi, "K1_minus_K", 1.0, kernels=kernels("monomial_z1sq_z2"))
    assert not s.exceptional
    assert s.gram_error <= 1e-12 and s.rank == 1 and s.onevar_dim == 1
    assert s.membership_error <= 1e-12


def test_boundary_scalar_exceptional_at_one():
    phi = inner("boundary_scalar")
    s = slice_isometry(phi, "K1_minus_K", 1.0, kernels=kernels("boundary_scalar"))
    assert s.exceptional and s.gram_error is None
    with pytest.raises(ExceptionalSlice):
        slice_isometry(phi, "K1_minus_K", 1.0, kernels=kernels("boundary_scalar"), raise_exceptional=True)


def test_boundary_scalar_generic_slice():
    phi = inner("boundary_scalar")
    s = slice_isometry(phi, "K1_minus_K", 1j, kernels=kernels("boundary_scalar"))
    assert not s.exceptional
    assert s.gram_error <= 1e-6 and s.onevar_dim == 1


def test_onevar_model_dim_examples():
    assert onevar_model_dim(inner("monomial_z1sq_z2"), 1.0) == 1
    assert onevar_model_dim(inner("example_10_1"), 1.0) == 1
    assert onevar_model_dim(inner("boundary_scalar"), 1j) == 1
    assert onevar_model_dim(inner("boundary_scalar"), 1.0) == 0


def test_exceptional_detection():
    assert is_exceptional(inner("boundary_scalar"), 1.0)
    assert not is_exceptional(inner("boundary_scalar"), 1j)
    assert not is_exceptional(inner("diagonal"), 1.0)


def test_unknown_space():
    with pytest.raises(KeyError):
        slice_isometry(inner("monomial_z1sq_z2"), "K3", 1.0)


@pytest.mark.parametrize("name", STRICT_BATTERY)
@pytest.mark.parametrize("space", sorted(SPACES))
def test_random_slices_are_isometric_and_onto(name, space):
    phi, can = inner(name), kernels(name)
    for t in random_torus_points(10, seed=21):
        s = slice_isometry(phi, space, t, kernels=can)
        assert not s.exceptional
        assert s.gram_error <= 1e-6
        assert s.rank == s.onevar_dim
        assert s.membership_error <= 1e-8


@pytest.mark.parametrize("name", STRICT_BATTERY + ["boundary_scalar"])
@pytest.mark.parametrize("var", [0, 1])
def test_onevar_dim_matches_degree(name, var):
    phi = inner(name)
    want = phi.gdeg[1 - var]
    hits = sum(onevar_model_dim(phi, t, var=var) == want for t in random_torus_points(20, seed=5))
    assert hits >= 19


def test_slice_report_dict():
    s = slice_isometry(inner("example_10_1"), "K2_minus_Z2K", np.exp(0.3j), kernels=kernels("example_10_1"))
    d = s.to_dict()
    assert d["which_space"] == "K2_minus_Z2K" and d["rank"] == d["onevar_dim"] == 2
