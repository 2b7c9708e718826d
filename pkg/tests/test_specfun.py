import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chronoline.errors import RangeError
from chronoline.oscquad import sphere_product_grid
from chronoline.specfun import (
    BranchedArgument,
    airy_ai,
    bessel_j,
    bessel_j_scaled,
    legendre_sum_kernel,
    parabolic_cylinder_d,
    parabolic_cylinder_d_integral,
    sph_harm,
)


def rel(a, b):
    return abs(complex(a) - complex(b)) / max(abs(complex(b)), 1e-300)


# -- BranchedArgument -------------------------------------------------------


def test_branched_argument_validation():
    with pytest.raises(RangeError):
        BranchedArgument(-1.0, 0.0)
    with pytest.raises(RangeError):
        BranchedArgument(1.0, -math.pi)
    assert BranchedArgument(0.0, 1.0).argument == 0.0
    assert BranchedArgument.from_complex(-2.0).argument == math.pi


def test_branch_sectors():
    z = BranchedArgument.sqrt_m_over_i_tau(1.0, 0.5)
    assert z.argument == pytest.approx(-math.pi / 4)
    assert z.value == pytest.approx(np.sqrt(1 / (1j * 0.5)))
    assert BranchedArgument.sqrt_m_over_i_tau(1.0, -0.5).argument == pytest.approx(math.pi / 4)
    assert BranchedArgument.m_over_4tau(2.0, -0.25).argument == math.pi
    assert BranchedArgument.m_over_4tau(2.0, -0.25).modulus == 2.0


def test_power_stays_on_branch():
    z = BranchedArgument(4.0, math.pi)
    # principal sqrt of -4 is 2i; on the upper lip the same
    assert z.power(0.5) == pytest.approx(2j)
    assert BranchedArgument(1.0, math.pi / 2).power(1.5) == pytest.approx(np.exp(0.75j * math.pi))


# -- Airy --------------------------------------------------------------------


def test_airy_origin_and_zero():
    assert airy_ai(0.0) == pytest.approx(3 ** (-2 / 3) / math.gamma(2 / 3), rel=1e-12)
    assert abs(airy_ai(-2.338107410459767)) < 1e-12


def test_airy_against_mpmath():
    for x in np.linspace(-20, 20, 41):
        assert rel(airy_ai(x), mp.airyai(x)) < 1e-10 or abs(airy_ai(x) - float(mp.airyai(x))) < 1e-14


def test_airy_decay_monotone():
    x = np.linspace(0, 30, 200)
    assert np.all(np.diff(airy_ai(x)) < 0)


def test_airy_range():
    with pytest.raises(RangeError):
        airy_ai(1e3)


# -- Bessel J ----------------------------------------------------------------


def test_bessel_half_order():
    x = np.linspace(0.1, 40, 50)
    assert np.allclose(bessel_j(0.5, x), np.sqrt(2 / (np.pi * x)) * np.sin(x), rtol=1e-12, atol=1e-15)


def test_bessel_three_quarter_series():
    assert rel(bessel_j(0.75, 1.0), mp.besselj(0.75, 1.0)) < 1e-10


@pytest.mark.parametrize("alpha", [0.25, -0.25, 0.75, -0.75, 1.25, 1.75, 2.75])
def test_bessel_rotation_identity(alpha):
    for x in np.linspace(0.05, 10, 37):
        lhs = bessel_j(alpha, BranchedArgument(x, math.pi))
        rhs = np.exp(1j * math.pi * alpha) * bessel_j(alpha, x)
        assert rel(lhs, rhs) < 1e-10


def test_bessel_against_mpmath_random():
    rng = np.random.default_rng(3)
    for _ in range(100):
        alpha = rng.choice([-0.75, -0.25, 0.25, 0.75, 1.25, 1.75, 2.25, 3.75])
        z = rng.uniform(0.01, 40) * np.exp(1j * rng.uniform(-np.pi, np.pi))
        ours = bessel_j(alpha, z)
        ref = complex(mp.besselj(alpha, mp.mpc(z)))
        assert rel(ours, ref) < 1e-9


def test_bessel_seam_continuity():
    for alpha in (-0.75, 0.25, 1.75):
        switch = max(12.0, 2 * alpha * alpha)
        lo, hi = bessel_j(alpha, switch * (1 - 1e-12)), bessel_j(alpha, switch * (1 + 1e-12))
        assert rel(lo, hi) < 1e-9


def test_bessel_scaled_at_zero():
    assert bessel_j_scaled(-0.75, 0.0) == pytest.approx(1 / math.gamma(0.25))


def test_bessel_order_rejected():
    with pytest.raises(RangeError):
        bessel_j(-1.0, 1.0)


# -- Parabolic cylinder ----------------------------------------------------------


def test_pcfd_origin():
    want = 2 ** (-0.75) * math.sqrt(math.pi) / math.gamma(1.25)
    assert parabolic_cylinder_d(-1.5, 0.0) == pytest.approx(want, rel=1e-13)
    assert want == pytest.approx(1.1627366340382, rel=1e-12)


@pytest.mark.parametrize("nu", [-1.5, -2.5])
def test_pcfd_against_mpmath(nu):
    rng = np.random.default_rng(11)
    for _ in range(60):
        w = rng.uniform(0, 30) * np.exp(1j * rng.uniform(-np.pi, np.pi))
        assert rel(parabolic_cylinder_d(nu, w), complex(mp.pcfd(nu, mp.mpc(w)))) < 1e-9


@pytest.mark.parametrize("nu", [-1.5, -2.5])
def test_pcfd_on_wave_rays(nu):
    # arguments reached by the timeline waves: arg w = +-pi/4 +- pi/2
    for phi in (math.pi / 4, 3 * math.pi / 4, -math.pi / 4, -3 * math.pi / 4):
        for r in np.linspace(0.1, 30, 25):
            w = r * np.exp(1j * phi)
            assert rel(parabolic_cylinder_d(nu, w), complex(mp.pcfd(nu, mp.mpc(w)))) < 1e-9


@pytest.mark.parametrize("nu", [-1.5, -2.5])
def test_pcfd_integral_representation(nu):
    rng = np.random.default_rng(5)
    for _ in range(20):
        w = rng.uniform(0, 5) * np.exp(1j * rng.uniform(-np.pi, np.pi))
        assert rel(parabolic_cylinder_d(nu, w), parabolic_cylinder_d_integral(nu, w)) < 1e-8


def test_pcfd_cauchy_mean():
    theta = 2 * np.pi * np.arange(64) / 64
    ring = -2.0 + 0.5 * np.exp(1j * theta)
    assert rel(np.mean(parabolic_cylinder_d(-1.5, ring)), parabolic_cylinder_d(-1.5, -2.0)) < 1e-8


def test_pcfd_seams():
    for nu in (-1.5, -2.5):
        for r in (4.0, 8.0):
            for phi in (0.3, 1.2, 2.5, -2.0):
                a = parabolic_cylinder_d(nu, r * (1 - 1e-12) * np.exp(1j * phi))
                b = parabolic_cylinder_d(nu, r * (1 + 1e-12) * np.exp(1j * phi))
                assert rel(a, b) < 1e-9


@settings(max_examples=40, deadline=None)
@given(st.floats(0.0, 6.0), st.floats(-3.1, 3.1))
def test_pcfd_recurrence(r, phi):
    # D_{nu+1}(z) - z D_nu(z) + nu D_{nu-1}(z) = 0 with nu = -3/2
    z = r * np.exp(1j * phi)
    d = {nu: parabolic_cylinder_d(nu, z) for nu in (-2.5, -1.5, -0.5)}
    resid = d[-0.5] - z * d[-1.5] - 1.5 * d[-2.5]
    assert abs(resid) < 1e-9 * max(1.0, abs(d[-0.5]), abs(z * d[-1.5]))


# -- Spherical harmonics and Legendre kernel -----------------------------------


def test_sph_harm_constant():
    assert sph_harm(0, 0, [0.0, 0.6, 0.8]) == pytest.approx(1 / math.sqrt(4 * math.pi))


def test_sph_harm_orthonormal():
    dirs, w = sphere_product_grid(12)
    for l1, m1, l2, m2 in [(1, 0, 1, 0), (2, 1, 2, 1), (3, -2, 3, -2), (2, 1, 3, 1), (1, -1, 1, 1)]:
        y1 = sph_harm(l1, m1, dirs)
        y2 = sph_harm(l2, m2, dirs)
        want = 1.0 if (l1, m1) == (l2, m2) else 0.0
        assert abs(np.sum(w * np.conj(y1) * y2) - want) < 1e-10


def test_sph_harm_against_mpmath():
    rng = np.random.default_rng(2)
    for _ in range(30):
        v = rng.normal(size=3)
        v /= np.linalg.norm(v)
        theta = math.acos(v[2])
        phi = math.atan2(v[1], v[0])
        l = int(rng.integers(0, 8))
        m = int(rng.integers(-l, l + 1))
        assert rel(sph_harm(l, m, v), complex(mp.spherharm(l, m, theta, phi))) < 1e-10


def test_sph_harm_errors():
    with pytest.raises(RangeError):
        sph_harm(1, 2, [0, 0, 1])
    with pytest.raises(RangeError):
        sph_harm(1, 0, [0, 0, 2])


def test_legendre_kernel_values():
    assert legendre_sum_kernel(0.0, 1.3) == pytest.approx(0.5)
    assert legendre_sum_kernel(0.5, math.pi) == pytest.approx(0.75 / (2 * 2.25**1.5))
    with pytest.raises(RangeError):
        legendre_sum_kernel(1.0, 0.0)


def test_legendre_kernel_partial_sum():
    a = np.array([0.3, -0.5, 0.81])
    b = np.array([-0.7, 0.2, 0.4])
    a /= np.linalg.norm(a)
    b /= np.linalg.norm(b)
    gamma = math.acos(a @ b)
    t = 0.3
    total = 0.0
    for l in range(41):
        total += t**l * sum(sph_harm(l, m, a) * np.conj(sph_harm(l, m, b)) for m in range(-l, l + 1))
    assert abs(2 * math.pi * total - legendre_sum_kernel(t, gamma)) < 1e-8
