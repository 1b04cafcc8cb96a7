import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kswave.errors import ChiOutOfRange, ConfigError, NegativeDiffusion, NonPositiveRate
from kswave.model import (AffineChi, ConstantChi, ModelParams, TabulatedChi, chi_eval,
                          chi_from_dict, equilibria, jacobian, spatial_rhs, validate_params)

pos = st.floats(0.1, 5.0)


def test_constant_chi_values():
    chi = ConstantChi(0.5)
    assert np.all(chi.values(np.linspace(0, 1, 7)) == 0.5)
    assert chi.label() == "const:0.5"


def test_affine_chi_values_and_derivative():
    chi = AffineChi(0.2, 0.3)
    assert chi.values(2.0) == pytest.approx(0.8)
    assert float(chi.derivative(1.0)) == 0.3


def test_tabulated_chi_interpolates_linearly():
    chi = TabulatedChi(((0.0, 0.0), (1.0, 1.0), (2.0, 0.0)))
    assert chi.values(0.5) == pytest.approx(0.5)
    assert chi.values(1.5) == pytest.approx(0.5)
    assert float(chi.derivative(0.5)) == pytest.approx(1.0)
    assert float(chi.derivative(1.5)) == pytest.approx(-1.0)


def test_tabulated_chi_rejects_unsorted_nodes():
    with pytest.raises(ConfigError):
        TabulatedChi(((0.0, 0.0), (0.0, 1.0)))


@pytest.mark.parametrize("chi", [ConstantChi(0.3), AffineChi(0.1, 0.2),
                                 TabulatedChi(((0.0, 0.1), (1.0, 0.4)))])
def test_chi_dict_roundtrip(chi):
    assert chi_from_dict(chi.to_dict()) == chi


def test_chi_from_dict_unknown_variant():
    with pytest.raises(ConfigError, match="chi.type"):
        chi_from_dict({"type": "cubic"})


def test_chi_eval_clamps_and_flags():
    val, clamped = chi_eval(AffineChi(0.0, 1.0), 3.0, beta=1.0, with_flag=True)
    assert clamped and val == pytest.approx(1.0)
    val, clamped = chi_eval(AffineChi(0.0, 1.0), 0.5, beta=1.0, with_flag=True)
    assert not clamped and val == pytest.approx(0.5)


@pytest.mark.parametrize("kwargs, err", [
    (dict(mu=0.0, beta=1.0, diff=0.0), NonPositiveRate),
    (dict(mu=-1.0, beta=1.0, diff=0.0), NonPositiveRate),
    (dict(mu=1.0, beta=0.0, diff=0.0), NonPositiveRate),
    (dict(mu=1.0, beta=1.0, diff=-0.1), NegativeDiffusion),
    (dict(mu=1.0, beta=1.0, diff=math.nan), NegativeDiffusion),
])
def test_validate_rejects_bad_rates(kwargs, err):
    with pytest.raises(err):
        validate_params(ModelParams(**kwargs))


def test_validate_rejects_chi_above_mu():
    with pytest.raises(ChiOutOfRange) as info:
        validate_params(ModelParams(1.0, 1.0, 0.0, ConstantChi(1.5)))
    assert info.value.value == 1.5


def test_validate_rejects_affine_chi_exceeding_mu_at_right_end():
    # chi(1/beta) = 0.5 + 1.0 * 1 > mu
    with pytest.raises(ChiOutOfRange):
        validate_params(ModelParams(1.0, 1.0, 0.0, AffineChi(0.5, 1.0)))


def test_validate_rejects_negative_chi():
    with pytest.raises(ChiOutOfRange):
        validate_params(ModelParams(1.0, 1.0, 0.0, AffineChi(-0.1, 0.2)))


def test_validate_requires_table_cover():
    chi = TabulatedChi(((0.0, 0.1), (0.5, 0.1)))
    with pytest.raises(ConfigError, match="chi.nodes"):
        validate_params(ModelParams(1.0, 1.0, 0.0, chi))


def test_validate_accepts_chi_equal_mu():
    p = ModelParams(2.0, 0.5, 0.0, ConstantChi(2.0))
    assert validate_params(p) is p


def test_params_dict_roundtrip():
    p = ModelParams(1.5, 2.0, 0.3, AffineChi(0.1, 0.2))
    assert ModelParams.from_dict(p.to_dict()) == p


def test_params_from_dict_missing_field():
    with pytest.raises(ConfigError, match="mu"):
        ModelParams.from_dict({"beta": 1.0})


@given(mu=pos, beta=pos, c=pos, chi=st.floats(0.0, 1.0))
def test_equilibria_are_zeros_of_3d_field(mu, beta, c, chi):
    p = ModelParams(mu, beta, 0.0, ConstantChi(chi * mu))
    eq = equilibria(p, c)
    assert np.allclose(spatial_rhs(eq.invaded, p, c), 0.0, atol=1e-14)
    assert np.allclose(spatial_rhs(eq.invading, p, c), 0.0, atol=1e-12)


@given(mu=pos, beta=pos, d=pos, c=pos, chi=st.floats(0.0, 1.0))
def test_equilibria_are_zeros_of_4d_field(mu, beta, d, c, chi):
    p = ModelParams(mu, beta, d, ConstantChi(chi * mu))
    eq = equilibria(p, c)
    assert len(eq.invading) == 4
    assert np.allclose(spatial_rhs(eq.invaded, p, c), 0.0, atol=1e-14)
    assert np.allclose(spatial_rhs(eq.invading, p, c), 0.0, atol=1e-12)


def _fd_jacobian(s, p, c, h=1e-6):
    s = np.asarray(s, dtype=float)
    cols = []
    for k in range(s.size):
        e = np.zeros_like(s)
        e[k] = h
        cols.append((np.array(spatial_rhs(s + e, p, c)) - np.array(spatial_rhs(s - e, p, c))) / (2 * h))
    return np.array(cols).T


@given(mu=pos, beta=pos, c=pos, a=st.floats(0.0, 0.5), b=st.floats(0.0, 0.5),
       u=st.floats(0.05, 0.95), frac=st.floats(0.05, 0.95), w=st.floats(0.0, 2.0),
       d=st.sampled_from([0.0, 0.7]), y=st.floats(-0.5, 0.0))
def test_jacobian_matches_finite_differences(mu, beta, c, a, b, u, frac, w, d, y):
    # affine chi with values in [0, mu] on [0, 1/beta]
    chi = AffineChi(a * mu, b * mu * beta)
    p = ModelParams(mu, beta, d, chi)
    v = frac / beta
    s = (u, v, w) if d == 0 else (u, v, y, w)
    assert np.allclose(jacobian(s, p, c), _fd_jacobian(s, p, c), rtol=1e-5, atol=1e-6)


def test_dimension_follows_diffusion():
    assert ModelParams(1, 1, 0).dim == 3
    assert ModelParams(1, 1, 0.5).dim == 4
