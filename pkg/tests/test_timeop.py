import math

import numpy as np
import pytest

from chronoline.errors import AccuracyError, ConvergenceWarning, RangeError, UnsupportedStateError
from chronoline.spectra import PhysicalParams, SpectralState, oscillator_spectrum, revival_time, square_well_spectrum
from chronoline.timeop import (
    apply_H_freefall,
    apply_T_freefall,
    commutator_3d_check,
    commutator_periodic_term,
    kernel_1d_free,
    kernel_1d_from_parity,
    kernel_3d_free,
    kernel_3d_partial_wave,
    pv_integral_Il,
)


def gauss3(p):
    return np.pi**-0.75 * np.exp(-0.5 * np.sum(p * p, axis=-1))


def gauss3_lap(p):
    return (np.sum(p * p, axis=-1) - 3.0) * gauss3(p)


def test_kernel_spot_values():
    assert kernel_1d_free(1, 0.5, 1).value == 0.375j
    assert abs(kernel_3d_free((1, 0, 0), (0.5, 0, 0), 1).value - 3j / (4 * math.pi)) < 1e-12
    assert kernel_1d_free(0.7, 0.7).value == 0


def test_kernel_from_parity_matches():
    rng = np.random.default_rng(1)
    for x, xp in rng.uniform(-3, 3, (30, 2)):
        assert abs(kernel_1d_from_parity(x, xp, 1.7).value - kernel_1d_free(x, xp, 1.7).value) < 1e-13


def test_kernels_hermitian():
    rng = np.random.default_rng(2)
    for _ in range(100):
        x, xp = rng.uniform(-3, 3, 2)
        assert kernel_1d_free(x, xp).value == pytest.approx(np.conj(kernel_1d_free(xp, x).value))
        a, b = rng.normal(size=(2, 3))
        assert kernel_3d_free(a, b).value == pytest.approx(np.conj(kernel_3d_free(b, a).value))


def test_kernel_3d_singular():
    with pytest.raises(RangeError):
        kernel_3d_free((1, 2, 3), (1, 2, 3))


def test_partial_wave_kernel():
    rng = np.random.default_rng(3)
    for _ in range(10):
        a = rng.normal(size=3)
        b = rng.normal(size=3)
        b *= rng.uniform(0.2, 0.6) * np.linalg.norm(a) / np.linalg.norm(b)
        exact = kernel_3d_free(a, b).value
        assert abs(kernel_3d_partial_wave(a, b).value - exact) < 1e-12 * abs(exact)
        assert abs(kernel_3d_partial_wave(a, b, l_max=50).value - exact) < 1e-8 * abs(exact)


def test_partial_wave_rotation_invariant():
    # the m-sum is basis independent: rotating both points leaves it unchanged
    a = np.array([0.3, 0.5, -1.0])
    b = np.array([0.2, -0.1, 0.3])
    c, s = math.cos(0.7), math.sin(0.7)
    rot = np.array([[c, -s, 0], [s, c, 0], [0, 0, 1]]) @ np.array([[1, 0, 0], [0, c, -s], [0, s, c]])
    v1 = kernel_3d_partial_wave(a, b, l_max=12).value
    v2 = kernel_3d_partial_wave(rot @ a, rot @ b, l_max=12).value
    assert abs(v1 - v2) < 1e-12


@pytest.mark.parametrize("l", [-1, 0, 1, 2, 3])
def test_il_closed_vs_numeric(l):
    for r1, r2 in ((1.0, 0.6), (0.5, 1.9)):
        res = pv_integral_Il(l, r1, r2, with_numeric=True)
        assert res.discrepancy < 1e-4
        assert res.numeric.converged


def test_il_closed_values():
    assert pv_integral_Il(0, 1.0, 0.5).closed_form == pytest.approx(0.5j)
    assert pv_integral_Il(2, 0.5, 1.0, m=2.0).closed_form == pytest.approx(-0.25j)
    assert pv_integral_Il(1, 1.0, 1.0, with_numeric=True).closed_form == 0
    with pytest.raises(RangeError):
        pv_integral_Il(-2, 1.0, 0.5)


def test_T_freefall_momentum_action():
    p = PhysicalParams(1.0, 2.0)
    x = np.linspace(-10, 10, 4001)
    k = 1.5
    psi = np.exp(1j * k * x - x * x / 16)
    dpsi = (1j * k - x / 8) * psi
    got = apply_T_freefall(x, psi, p)
    assert np.max(np.abs(got[2:-2] - dpsi[2:-2] / (1j * 2.0))) < 1e-9
    assert np.all(got[:2] == 0) and np.all(got[-2:] == 0)


def test_freefall_commutator():
    p = PhysicalParams(1.0, 1.3)
    x = np.linspace(-12, 12, 2401)
    h = x[1] - x[0]
    psi = np.pi**-0.25 * np.exp(-0.5 * x * x + 0.7j * x)
    th = apply_T_freefall(x, apply_H_freefall(x, psi, p), p)
    ht = apply_H_freefall(x, apply_T_freefall(x, psi, p), p)
    assert abs(np.sum(np.conj(psi) * (th - ht)) * h - 1j) < 1e-6


def test_freefall_rough_input_warns():
    p = PhysicalParams(1.0, 1.0)
    x = np.linspace(-1, 1, 41)
    with pytest.warns(ConvergenceWarning):
        apply_T_freefall(x, np.abs(x) + 0j, p)
    with pytest.raises(RangeError):
        apply_T_freefall(np.array([0.0, 1.0, 3.0] * 4), np.zeros(12), p)


def test_periodic_commutator():
    rev = revival_time(oscillator_spectrum(2))
    assert abs(commutator_periodic_term(SpectralState(np.array([1.0, 0.0])), rev, 0.3)) < 1e-12
    half = SpectralState(np.array([1.0, 1.0]) / math.sqrt(2))
    assert abs(commutator_periodic_term(half, rev, math.pi) - 1j) < 1e-10
    assert abs(commutator_periodic_term(half, rev, 0.0) + 1j) < 1e-10
    # a stationary state of a larger spectrum
    rev6 = revival_time(square_well_spectrum(6))
    assert abs(commutator_periodic_term(SpectralState(np.eye(6)[2]), rev6, 1.1)) < 1e-12
    with pytest.raises(UnsupportedStateError):
        commutator_periodic_term(SpectralState(np.array([1.0, 0.0]), lambda e: e), rev, 0.0)


def test_commutator_3d_gaussian():
    got = commutator_3d_check(gauss3, gauss3, lap_f=gauss3_lap, lap_g=gauss3_lap)
    assert abs(got - 1j) < 5e-3


def test_commutator_3d_orthogonal_pair_fd_laplacian():
    odd = lambda p: math.sqrt(2) * p[..., 0] * gauss3(p)
    got = commutator_3d_check(odd, gauss3, m=2.0)
    assert abs(got) < 5e-3


def test_commutator_3d_unresolved():
    narrow = lambda p: np.exp(-8 * np.sum(p * p, axis=-1))
    with pytest.raises(AccuracyError):
        commutator_3d_check(narrow, gauss3, tol=1e-9, resolution=(2, 4, 2))
