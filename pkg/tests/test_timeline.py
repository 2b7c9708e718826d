import math

import numpy as np
import pytest

from chronoline.errors import RangeError, SpectrumMismatchError, UnsupportedStateError
from chronoline.spectra import (
    ContinuumBand,
    SpectralState,
    hydrogen_spectrum,
    oscillator_spectrum,
    revival_time,
    square_well_spectrum,
)
from chronoline.timeline import (
    TimeMesh,
    alias_free_scale,
    build_time_mesh,
    covariance_deviation,
    phasor_closure_sum,
    plancherel_residual,
    povm_stats,
    subspace_projector,
    subspace_rotation,
    system_time_drift,
    timeline_transform,
    weak_orthogonality_residual,
)


def gaussian_packet(e0=1.0, s=0.5):
    return SpectralState(np.zeros(0), lambda e: (2 * math.pi * s * s) ** -0.25 * np.exp(-((e - e0) ** 2) / (4 * s * s)))


def smooth_band_state():
    # sin^2 bump on [0, 4], unit norm
    c = 1 / math.sqrt(1.5)
    return SpectralState(np.zeros(0), lambda e: c * np.sin(np.pi * e / 4) ** 2), ContinuumBand(0.0, 4.0)


def closure_extremes(spec, scale):
    rev = revival_time(spec)
    mesh = build_time_mesh(rev, scale)
    n = len(spec)
    off = max(abs(phasor_closure_sum(spec, rev, mesh, j, k)) for j in range(n) for k in range(n) if j != k)
    diag = max(abs(phasor_closure_sum(spec, rev, mesh, j, j) - mesh.size) for j in range(n))
    return off, diag, mesh.size


def test_mesh_properties():
    m = TimeMesh(0.5, 2 * math.pi, 4, 3)
    assert m.size == 12
    assert m.points[0] == 0.5
    assert m.delta_tau == pytest.approx(2 * math.pi / 12)
    with pytest.raises(RangeError):
        TimeMesh(0.0, -1.0, 2)


def test_oscillator_closure_base_mesh():
    off, diag, n = closure_extremes(oscillator_spectrum(8), 1)
    assert off < 1e-10 * n
    assert diag < 1e-12 * n


@pytest.mark.parametrize("spec", [square_well_spectrum(6), hydrogen_spectrum(3), oscillator_spectrum(8)])
def test_closure_alias_free_mesh(spec):
    scale = alias_free_scale(revival_time(spec))
    off, diag, n = closure_extremes(spec, scale)
    assert off < 1e-10 * n
    assert diag < 1e-12 * n


def test_alias_scales():
    assert alias_free_scale(revival_time(oscillator_spectrum(8))) == 1
    assert alias_free_scale(revival_time(square_well_spectrum(6))) == 3
    assert alias_free_scale(revival_time(hydrogen_spectrum(3))) == 2


def test_aliasing_detected_on_base_mesh():
    # n_j = j^2: 25 - 1 is a multiple of 6 so levels 1 and 5 alias
    spec = square_well_spectrum(6)
    rev = revival_time(spec)
    assert abs(phasor_closure_sum(spec, rev, build_time_mesh(rev), 0, 4)) == pytest.approx(6)


def test_mesh_mismatch():
    spec = oscillator_spectrum(3)
    rev = revival_time(spec)
    with pytest.raises(SpectrumMismatchError):
        phasor_closure_sum(oscillator_spectrum(4), rev, build_time_mesh(rev), 0, 1)


def test_discrete_transform_values():
    spec = oscillator_spectrum(3)
    rev = revival_time(spec)
    st = SpectralState(np.array([1, 1, 1]) / math.sqrt(3))
    v = timeline_transform(st, rev, None, [0.0]).values[0]
    assert v == pytest.approx(math.sqrt(3) / math.sqrt(2 * math.pi))


def test_transform_requires_data():
    with pytest.raises(UnsupportedStateError):
        timeline_transform(SpectralState(np.array([1.0])), None, None, [0.0])
    with pytest.raises(UnsupportedStateError):
        timeline_transform(gaussian_packet(), None, None, [0.0])


def test_quasi_continuum_guard():
    band = ContinuumBand(0.0, 4.0, level_spacing=0.1)
    st, _ = smooth_band_state()
    timeline_transform(st, None, band, [5.0])
    with pytest.raises(RangeError):
        timeline_transform(st, None, band, [0.2 * band.tau_rev])


def test_continuum_gaussian_transform():
    # Gaussian amplitude maps to a Gaussian in system time
    e0, s = 1.0, 0.5
    band = ContinuumBand(-math.inf, math.inf)
    taus = np.linspace(-4, 4, 9)
    got = timeline_transform(gaussian_packet(e0, s), None, band, taus).values
    want = (2 * s * s / math.pi) ** 0.25 * np.exp(1j * e0 * taus - s * s * taus**2)
    assert np.max(np.abs(got - want)) < 1e-9


def test_plancherel_gaussian_packet():
    band = ContinuumBand(-math.inf, math.inf)
    assert plancherel_residual(gaussian_packet(), None, band, tol=1e-10) < 1e-8


def test_plancherel_discrete_and_finite_band():
    spec = square_well_spectrum(4)
    rev = revival_time(spec)
    st = SpectralState(np.array([1, 1j, 0.5, -0.3]))
    assert plancherel_residual(st, rev, None) < 1e-12
    cst, band = smooth_band_state()
    assert plancherel_residual(cst, None, band, tol=1e-7) < 1e-6


@pytest.mark.parametrize("t", [0.1, 1.0, 5.0])
def test_covariance(t):
    band = ContinuumBand(-math.inf, math.inf)
    assert covariance_deviation(gaussian_packet(), None, band, np.linspace(-6, 6, 25), t) < 1e-7
    spec = hydrogen_spectrum(3)
    rev = revival_time(spec)
    st = SpectralState(np.array([0.6, 0.8j, 0.0]))
    assert covariance_deviation(st, rev, None, np.linspace(0, 50, 11), t) < 1e-12


def test_weak_orthogonality():
    spec = square_well_spectrum(4)
    rev = revival_time(spec)
    st = SpectralState(np.array([1, 1j, 0.5, -0.3]))
    assert weak_orthogonality_residual(st, rev, None, 0.4) < 1e-12
    cst, band = smooth_band_state()
    assert weak_orthogonality_residual(cst, None, band, 0.3, tol=1e-7) < 1e-6
    with pytest.raises(UnsupportedStateError):
        weak_orthogonality_residual(gaussian_packet(), None, ContinuumBand(), 0.0)


def test_povm_gaussian():
    e0, s = 1.0, 0.5
    band = ContinuumBand(-math.inf, math.inf)
    taus = np.linspace(-8, 8, 801)
    sample = timeline_transform(gaussian_packet(e0, s), None, band, taus, tol=1e-8)
    avg, spread, norm = povm_stats(sample)
    assert norm == pytest.approx(1.0, abs=1e-6)
    assert abs(avg) < 1e-8
    assert spread == pytest.approx(1 / (2 * s), rel=1e-5)
    assert sample.all_converged


def test_system_time_drift():
    spec = oscillator_spectrum(2)
    rev = revival_time(spec)
    # stationary state: the drift vanishes
    st = SpectralState(np.array([1.0, 0.0]))
    assert abs(system_time_drift(st, rev, None, 0.0, 0.3)) < 1e-12
    # at a node of <tau|psi> the mean system time moves at unit rate
    half = SpectralState(np.array([1.0, 1.0]) / math.sqrt(2))
    assert system_time_drift(half, rev, None, math.pi, 0.0) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(UnsupportedStateError):
        system_time_drift(gaussian_packet(), None, ContinuumBand(), 0.0, 0.0)


def test_subspace_rotation_preserves_projector():
    rng = np.random.default_rng(4)
    a = rng.normal(size=20) + 1j * rng.normal(size=20)
    b = rng.normal(size=20) + 1j * rng.normal(size=20)
    u = np.array([[1, 1j], [1, -1j]]) / math.sqrt(2)
    rot = subspace_rotation([a, b], u)
    assert np.allclose(rot[0], (a + 1j * b) / math.sqrt(2))
    assert np.allclose(subspace_projector(rot), subspace_projector([a, b]), atol=1e-13)
    with pytest.raises(RangeError):
        subspace_rotation([a, b], [[1, 1], [0, 1]])


def test_sample_csv(tmp_path):
    spec = oscillator_spectrum(2)
    rev = revival_time(spec)
    s = timeline_transform(SpectralState(np.array([1.0, 0.0])), rev, None, [0.0, 1.0])
    path = tmp_path / "s.csv"
    s.to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "tau,re,im,density"
    assert len(lines) == 3
