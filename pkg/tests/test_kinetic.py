import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

import oracles
from mixedpipe import kinetic as k
from mixedpipe.model import WVector

S3 = np.sqrt(3.0)


def test_chi_examples():
    assert k.chi(0.0) == pytest.approx(1 / (2 * S3))
    assert k.chi(0.0) == pytest.approx(0.288675, abs=1e-6)
    assert k.chi(2.0) == 0.0
    assert k.chi(-1.5) == k.chi(1.5) == pytest.approx(1 / (2 * S3))
    assert np.array_equal(k.chi(np.array([-3.0, 3.0])), [0.0, 0.0])


def test_chi_constraints():
    w = np.linspace(-3, 3, 1001)
    assert np.array_equal(k.chi(w), k.chi(-w))
    assert quad(k.chi, -S3, S3)[0] == pytest.approx(1.0, rel=1e-13)
    assert quad(lambda x: x * x * k.chi(x), -S3, S3)[0] == pytest.approx(1.0, rel=1e-13)


def test_gibbs_density():
    assert k.gibbs_density(k.GibbsParameters(1, 0, 1), 0.0) == pytest.approx(1 / (2 * S3))
    assert k.gibbs_density(k.GibbsParameters(1, 0, 1), 2.0) == 0.0
    # A / (2 sqrt(3) b) = 2 / sqrt(3)
    assert k.gibbs_density(k.GibbsParameters(2, 3, 0.5), 3.0) == pytest.approx(1.1547, abs=1e-4)
    p = k.GibbsParameters(2.0, -1.0, 0.7)
    lo, hi = p.support
    assert (lo, hi) == (pytest.approx(-1 - 0.7 * S3), pytest.approx(-1 + 0.7 * S3))
    assert p.mirrored() == k.GibbsParameters(2.0, 1.0, 0.7)


def test_moments_examples():
    assert k.moments(k.GibbsParameters(1, 0, 1)) == (1, 0, 1)
    assert k.moments(k.GibbsParameters(2, 3, 0.5)) == pytest.approx((2, 6, 18.5))


@given(st.floats(0.01, 10), st.floats(-10, 10), st.floats(0.1, 30))
def test_moments_against_quadrature(A, u, b):
    m = k.moments(k.GibbsParameters(A, u, b))
    scale = (A, A * (abs(u) + b), A * (abs(u) + b) ** 2)
    for j in range(3):
        assert abs(m[j] - oracles.moment(A, u, b, j)) <= 1e-12 * scale[j]


def test_delta_phi():
    w = WVector(1.0, 3.0, 1.0)
    assert k.delta_phi(w, w, [1.0, -0.3, 0.2]) == 0.0
    assert k.delta_phi(WVector(1.0, 3.0, 1.0), WVector(1.1, 3.0, 1.0),
                       [1.0, -0.3, 0.2]) == pytest.approx(0.1)
    assert k.delta_phi([0, 1, 1], [0.5, 2, 0.5], [1.0, 2.0, 4.0]) == pytest.approx(0.5)


def _data(AL, uL, bL, AR, uR, bR, dphi):
    return k.InterfaceData(k.GibbsParameters(AL, uL, bL), k.GibbsParameters(AR, uR, bR), dphi)


def test_identical_sides_consistent():
    f = k.interface_flux(_data(2, 3, 0.5, 2, 3, 0.5, 0.0))
    assert np.allclose(f.F_minus, [6.0, 18.5], rtol=1e-14)
    assert np.allclose(f.F_plus, [6.0, 18.5], rtol=1e-14)
    f = k.interface_flux(_data(1.3, -0.4, 2.0, 1.3, -0.4, 2.0, 0.0))
    Q, M = 1.3 * -0.4, 1.3 * 0.16 + 1.3 * 4.0
    assert np.allclose(f.F_minus, [Q, M], rtol=1e-13)
    assert np.allclose(f.F_plus, [Q, M], rtol=1e-13)


@given(st.floats(0.1, 5), st.floats(-5, 5), st.floats(0.5, 25),
       st.floats(0.1, 5), st.floats(-5, 5), st.floats(0.5, 25))
def test_zero_barrier_flux_continuous(AL, uL, bL, AR, uR, bR):
    f = k.interface_flux(_data(AL, uL, bL, AR, uR, bR, 0.0))
    scale = k.flux_scales(_data(AL, uL, bL, AR, uR, bR, 0.0))
    assert np.all(np.abs(f.F_minus - f.F_plus) <= 1e-12 * scale[:2])


def test_infinite_barrier_is_a_wall():
    # no particle leaves the right cell towards the left: total reflection
    for right in ((0.0, 0.0, 1.0), (1.0, 3.0, 1.0)):
        f = k.interface_flux(_data(2.0, 0.7, 1.5, *right, 1e12))
        assert abs(f.F_minus[0]) < 1e-13
        # every outgoing particle comes back: twice the outgoing momentum flux
        h = 2.0 / (2 * S3 * 1.5)
        hi = 0.7 + S3 * 1.5
        assert f.F_minus[1] == pytest.approx(2 * h * hi ** 3 / 3, rel=1e-12)


@given(st.floats(0.1, 5), st.floats(-5, 5), st.floats(0.5, 25),
       st.floats(0.1, 5), st.floats(-5, 5), st.floats(0.5, 25), st.floats(-20, 20))
def test_mass_flux_equal_on_both_sides(AL, uL, bL, AR, uR, bR, dphi):
    d = _data(AL, uL, bL, AR, uR, bR, dphi)
    f = k.interface_flux(d)
    assert abs(f.F_minus[0] - f.F_plus[0]) <= 1e-12 * k.flux_scales(d)[0]


@given(st.floats(0.1, 5), st.floats(-5, 5), st.floats(0.5, 25),
       st.floats(0.1, 5), st.floats(-5, 5), st.floats(0.5, 25), st.floats(-20, 20))
def test_mirror_property(AL, uL, bL, AR, uR, bR, dphi):
    # reflecting x -> -x swaps the sides, flips velocities and reverses the barrier
    d = _data(AL, uL, bL, AR, uR, bR, dphi)
    m = _data(AR, -uR, bR, AL, -uL, bL, -dphi)
    f, g = k.interface_flux(d), k.interface_flux(m)
    assert g.F_minus[0] == -f.F_plus[0]
    assert g.F_minus[1] == f.F_plus[1]
    assert g.F_plus[0] == -f.F_minus[0]
    assert g.F_plus[1] == f.F_minus[1]


@given(st.floats(0.1, 5), st.floats(-5, 5), st.floats(0.5, 25),
       st.floats(0.1, 5), st.floats(-5, 5), st.floats(0.5, 25), st.floats(-5, 5))
def test_flux_against_quadrature(AL, uL, bL, AR, uR, bR, dphi):
    d = _data(AL, uL, bL, AR, uR, bR, dphi)
    assert k.flux_relative_error(k.interface_flux(d), k.quadrature_flux(d), d) < 1e-10


@pytest.mark.parametrize("dphi", [-200.0, -1e-3, 1e-9, 0.37, 200.0])
def test_flux_against_quadrature_extremes(dphi):
    rng = np.random.default_rng(7)
    for _ in range(20):
        d = k.random_interface(rng)
        d = k.InterfaceData(d.left, d.right, dphi)
        assert k.flux_relative_error(k.interface_flux(d), k.quadrature_flux(d), d) < 1e-10


def test_vacuum_side_contributes_nothing():
    f = k.interface_flux(_data(0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.3))
    assert np.all(f.F_minus == 0) and np.all(f.F_plus == 0)
    one = k.interface_flux(_data(1.0, 0.5, 1.0, 0.0, 0.0, 1.0, 0.0))
    h = 1.0 / (2 * S3)
    hi = 0.5 + S3
    assert one.F_minus[0] == pytest.approx(h * hi * hi / 2)


def test_microscopic_sets_follow_barrier_semantics():
    d = _data(1.0, 0.0, 1.0, 1.0, 0.0, 1.0, 0.05)
    minus, plus = k.microscopic_fluxes(d)
    kk = 2 * 9.81 * 0.05
    h = 1 / (2 * S3)
    # slow left-moving particles at the left side are reflections of the left cell
    assert minus(-0.5 * np.sqrt(kk)) == pytest.approx(h)
    # fast ones come from the right cell through the barrier
    assert minus(-1.5) == pytest.approx(h)
    assert minus(-2.2) == 0.0
    assert plus(0.1) == pytest.approx(h)  # transmitted from the left
    assert plus(-2.0) == 0.0


def test_relative_error_floor():
    d = _data(1.0, 0.0, 1.0, 1.0, 0.0, 1.0, 0.0)
    a = k.FluxPair(np.array([0.0, 1.0]), np.array([0.0, 1.0]))
    b = k.FluxPair(np.array([1e-17, 1.0]), np.array([0.0, 1.0]))
    assert k.flux_relative_error(a, b, d) < 1e-10
