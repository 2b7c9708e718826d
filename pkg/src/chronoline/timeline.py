"""
The spectral-to-time transform and the identities it must satisfy.

A timeline value is

    <tau|psi> = tau_rev^{-1/2} sum_j exp(i E_j tau) <E_j|psi>
              + (2 pi)^{-1/2} int exp(i E tau) <E|psi> dE

with unit phase factors on the discrete time states.  This module evaluates
it on grids, builds uniform time meshes over one revival period, and measures
the residuals of closure, covariance, the Plancherel identity and weak
orthogonality.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.integrate import trapezoid

from .errors import RangeError, SpectrumMismatchError, UnsupportedStateError
from .oscquad import DampingPolicy, fourier_semiaxis
from .spectra import ContinuumBand, DiscreteSpectrum, RevivalData, SpectralState

__all__ = [
    "TimeMesh",
    "TimelineSample",
    "build_time_mesh",
    "alias_free_scale",
    "phasor_closure_sum",
    "timeline_transform",
    "covariance_deviation",
    "plancherel_residual",
    "weak_orthogonality_residual",
    "povm_stats",
    "system_time_drift",
    "subspace_rotation",
    "subspace_projector",
]

TAU_GUARD = 0.1


@dataclass(frozen=True)
class TimeMesh:
    """``n * N`` equally spaced system times covering one revival period."""

    tau0: float
    tau_rev: float
    n_levels: int
    scale_n: int = 1

    def __post_init__(self):
        if self.scale_n < 1 or self.n_levels < 1:
            raise RangeError("scale_n and n_levels must be >= 1")
        if not self.tau_rev > 0:
            raise RangeError("tau_rev must be positive")

    @property
    def size(self) -> int:
        return self.scale_n * self.n_levels

    @property
    def delta_tau(self) -> float:
        return self.tau_rev / self.size

    @property
    def points(self) -> np.ndarray:
        return self.tau0 + self.delta_tau * np.arange(self.size)


def build_time_mesh(revival: RevivalData, scale_n: int = 1, tau0: float = 0.0) -> TimeMesh:
    """Mesh of ``scale_n * N`` points for the spectrum behind ``revival``."""
    return TimeMesh(float(tau0), revival.tau_rev, len(revival.n_j), int(scale_n))


def alias_free_scale(revival: RevivalData, max_scale: int = 1024) -> int:
    """Smallest mesh refinement on which no two levels share a phasor polygon.

    On a mesh of ``n N`` points the sum for the pair ``(j, k)`` is
    ``sum_p exp(2 pi i (n_j - n_k) p / (n N))``, which vanishes unless
    ``n N`` divides ``n_j - n_k``.  This returns the least ``n`` avoiding
    every such coincidence.
    """
    nj = np.asarray(revival.n_j, dtype=np.int64)
    diffs = np.abs(nj[:, None] - nj[None, :])[np.triu_indices(len(nj), 1)]
    for n in range(1, max_scale + 1):
        if np.all(diffs % (n * len(nj)) != 0):
            return n
    raise RangeError("no alias-free refinement within max_scale")


def _check_mesh(spectrum: DiscreteSpectrum, revival: RevivalData, mesh: TimeMesh) -> None:
    if len(spectrum) != len(revival.n_j) or mesh.n_levels != len(spectrum):
        raise SpectrumMismatchError("mesh, revival and spectrum have different level counts")
    if revival.levels and tuple(revival.levels) != tuple(spectrum.levels):
        raise SpectrumMismatchError("revival data belongs to a different spectrum")
    if not math.isclose(mesh.tau_rev, revival.tau_rev, rel_tol=1e-12):
        raise SpectrumMismatchError("mesh period differs from the revival time")


def phasor_closure_sum(
    spectrum: DiscreteSpectrum, revival: RevivalData, mesh: TimeMesh, j: int, k: int
) -> complex:
    """``sum_p exp(i (E_j - E_k) p dtau)`` over the mesh.

    Vanishes for ``j != k`` unless the pair aliases on this mesh (see
    :func:`alias_free_scale`); equals the number of mesh points for ``j == k``.
    """
    _check_mesh(spectrum, revival, mesh)
    n = len(spectrum)
    if not (0 <= j < n and 0 <= k < n):
        raise RangeError("level index out of range")
    e = spectrum.energies
    p = np.arange(mesh.size)
    return complex(np.sum(np.exp(1j * (e[j] - e[k]) * p * mesh.delta_tau)))


@dataclass(frozen=True)
class TimelineSample:
    """Timeline wave function ``<tau|psi>`` on a grid of system times."""

    tau_grid: np.ndarray
    values: np.ndarray
    abs_error: Optional[np.ndarray] = None
    converged: Optional[np.ndarray] = None

    @property
    def density(self) -> np.ndarray:
        """POVM density ``|<tau|psi>|^2``."""
        return np.abs(self.values) ** 2

    @property
    def all_converged(self) -> bool:
        return True if self.converged is None else bool(np.all(self.converged))

    def to_csv(self, path) -> None:
        """Write columns ``tau, re, im, density``."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["tau", "re", "im", "density"])
            for t, v, d in zip(self.tau_grid, self.values, self.density):
                w.writerow([f"{t:.11e}", f"{v.real:.11e}", f"{v.imag:.11e}", f"{d:.11e}"])


def _continuum_value(amp, tau: float, band: ContinuumBand, tol: float, damping: DampingPolicy):
    """Fourier integral over the band, splitting doubly infinite bands at 0."""
    lo, hi = band.e_min, band.e_max
    if math.isfinite(lo):
        r = fourier_semiaxis(amp, tau, lo, hi, tol, damping)
        return r.value, r.abs_error_estimate, r.converged
    split = 0.0 if not math.isfinite(hi) else hi
    right = None
    if not math.isfinite(hi):
        right = fourier_semiaxis(amp, tau, split, math.inf, tol / 2, damping)
    # int_{-inf}^{split} e^{iE tau} A(E) dE = int_{-split}^{inf} e^{-iE tau} A(-E) dE
    left = fourier_semiaxis(lambda e: amp(-e), -tau, -split, math.inf, tol / 2, damping)
    val = left.value + (right.value if right else 0.0)
    err = left.abs_error_estimate + (right.abs_error_estimate if right else 0.0)
    ok = left.converged and (right.converged if right else True)
    return val, err, ok


def timeline_transform(
    state: SpectralState,
    revival: Optional[RevivalData],
    band: Optional[ContinuumBand],
    tau_grid: Sequence[float],
    tol: float = 1e-10,
    damping: DampingPolicy = DampingPolicy.none(),
    tau_guard: float = TAU_GUARD,
) -> TimelineSample:
    """Evaluate ``<tau|psi>`` on a grid.

    Parameters
    ----------
    state : SpectralState
    revival : RevivalData or None
        Required when the state has discrete amplitudes; fixes the energies
        and the ``tau_rev^{-1/2}`` scale of the discrete time states.
    band : ContinuumBand or None
        Required when the state has a continuum amplitude.
    tau_grid : sequence of float
    tol : float
        Absolute tolerance of each continuum quadrature.
    damping : DampingPolicy
        Passed to :func:`chronoline.oscquad.fourier_semiaxis`.
    tau_guard : float
        For quasi-continuum bands, times with ``|tau| > tau_guard * tau_rev``
        of the band are refused, since the integral no longer approximates
        the underlying sum there.

    Returns
    -------
    TimelineSample
        Per-point error estimates and convergence flags are kept.
    """
    taus = np.asarray(tau_grid, dtype=float).reshape(-1)
    values = np.zeros(taus.shape, dtype=complex)
    errors = np.zeros(taus.shape)
    ok = np.ones(taus.shape, dtype=bool)
    amps = state.discrete_amplitudes
    if amps.size:
        if revival is None:
            raise UnsupportedStateError("discrete amplitudes need revival data")
        if amps.size != len(revival.n_j):
            raise SpectrumMismatchError("amplitude count differs from the number of levels")
        e = revival.energies
        values += np.exp(1j * np.outer(taus, e)) @ amps / math.sqrt(revival.tau_rev)
    if state.has_continuum:
        if band is None:
            raise UnsupportedStateError("continuum amplitude needs a band")
        if band.tau_rev is not None and np.any(np.abs(taus) > tau_guard * band.tau_rev):
            raise RangeError(
                f"|tau| exceeds {tau_guard:g} tau_rev of the quasi-continuum; the band integral is not valid there"
            )
        for i, t in enumerate(taus):
            v, err, conv = _continuum_value(state.continuum_amplitude, float(t), band, tol, damping)
            values[i] += v
            errors[i] = err
            ok[i] = conv
    return TimelineSample(taus, values, errors, ok)


def covariance_deviation(
    state: SpectralState,
    revival: Optional[RevivalData],
    band: Optional[ContinuumBand],
    tau_grid: Sequence[float],
    t: float,
    tol: float = 1e-10,
) -> float:
    """Largest ``|<tau|psi(t)> - <tau - t|psi(0)>|`` over the grid."""
    taus = np.asarray(tau_grid, dtype=float)
    evolved = state.evolved(revival, t)
    a = timeline_transform(evolved, revival, band, taus, tol).values
    b = timeline_transform(state, revival, band, taus - t, tol).values
    return float(np.max(np.abs(a - b)))


def _continuum_norm(state: SpectralState, band: ContinuumBand, tol: float) -> float:
    from .oscquad import adaptive_gauss, contour_integral

    def f(e):
        return np.abs(state.continuum_amplitude(e)) ** 2

    lo, hi = band.e_min, band.e_max
    if math.isfinite(lo) and math.isfinite(hi):
        return adaptive_gauss(f, lo, hi, tol=tol).value.real
    total = 0.0
    if math.isfinite(lo):
        return contour_integral(f, [lo], 1.0, tol=tol, min_extent=16.0).value.real
    split = 0.0 if not math.isfinite(hi) else hi
    # the leftward ray runs against the orientation of the real line
    total -= contour_integral(f, [split], -1.0, tol=tol / 2, min_extent=16.0).value.real
    if not math.isfinite(hi):
        total += contour_integral(f, [split], 1.0, tol=tol / 2, min_extent=16.0).value.real
    return total


def _discrete_time_norm(amps: np.ndarray, revival: RevivalData) -> float:
    """``int_0^{tau_rev} |discrete part|^2 dtau`` by a trapezoid rule exact for it."""
    nj = np.asarray(revival.n_j)
    spread = int(np.max(nj) - np.min(nj)) if nj.size else 0
    mesh = np.arange(2 * spread + 2) * revival.tau_rev / (2 * spread + 2)
    vals = np.exp(1j * np.outer(mesh, revival.energies)) @ amps / math.sqrt(revival.tau_rev)
    return float(np.sum(np.abs(vals) ** 2) * revival.tau_rev / mesh.size)


def _continuum_time_norm(state, band, tol, h0=0.25, t_max=None):
    """``int |<tau|psi>|^2 dtau`` over the real line by refined trapezoid sums.

    For amplitudes confined to a band of width ``W`` the trapezoid rule is
    exact up to aliasing once ``h < pi / W``; the grid is refined and extended
    until two successive sums agree.
    """
    cont_only = SpectralState(np.zeros(0), state.continuum_amplitude)
    h = h0
    t_max = t_max or 32.0
    cache = {}

    def sample(grid):
        need = [t for t in grid if t not in cache]
        if need:
            vals = timeline_transform(cont_only, None, band, need, tol=tol * 1e-2).values
            cache.update(zip(need, vals))
        return np.array([cache[t] for t in grid])

    prev = None
    for _ in range(8):
        n = int(round(t_max / h))
        grid = [float(x) for x in h * np.arange(-n, n + 1)]
        dens = np.abs(sample(grid)) ** 2
        total = h * float(np.sum(dens))
        edge = max(dens[0], dens[-1])
        if prev is not None and abs(total - prev) < tol and edge * t_max < tol:
            return total, abs(total - prev)
        prev = total
        if edge * t_max >= tol:
            t_max *= 2
        else:
            h /= 2
    return prev, float("inf")


def plancherel_residual(
    state: SpectralState,
    revival: Optional[RevivalData],
    band: Optional[ContinuumBand],
    tol: float = 1e-9,
) -> float:
    """``|| ||psi||^2 in energy - ||psi||^2 in system time |``.

    The discrete part is integrated over one revival period and the continuum
    part over the whole real line; each must reproduce its own share of the
    norm, so the two contributions are compared separately and added.
    """
    resid = 0.0
    amps = state.discrete_amplitudes
    if amps.size:
        if revival is None:
            raise UnsupportedStateError("discrete amplitudes need revival data")
        resid += abs(float(np.sum(np.abs(amps) ** 2)) - _discrete_time_norm(amps, revival))
    if state.has_continuum:
        if band is None:
            raise UnsupportedStateError("continuum amplitude needs a band")
        e_norm = _continuum_norm(state, band, tol * 1e-2)
        t_norm, _ = _continuum_time_norm(state, band, tol)
        resid += abs(e_norm - t_norm)
    return resid


def weak_orthogonality_residual(
    state: SpectralState,
    revival: Optional[RevivalData],
    band: Optional[ContinuumBand],
    tau: float,
    tol: float = 1e-9,
) -> float:
    """``|<tau|psi> - int <tau|tau'><tau'|psi> dtau'|`` at one system time.

    Discrete part: ``tau'`` runs over one revival period with the overlap
    ``tau_rev^{-1} sum_j exp(i E_j (tau - tau'))``.  Continuum part: the band
    must be finite, the overlap is ``(e^{i b u} - e^{i a u}) / (2 pi i u)``
    with ``u = tau - tau'``, and ``tau'`` runs over the real line.
    """
    lhs = timeline_transform(state, revival, band, [tau], tol).values[0]
    rhs = 0.0j
    amps = state.discrete_amplitudes
    if amps.size:
        e = revival.energies
        nj = np.asarray(revival.n_j)
        m = 2 * int(np.max(nj) - np.min(nj)) + 2
        tp = tau + np.arange(m) * revival.tau_rev / m
        psi = timeline_transform(SpectralState(amps), revival, None, tp).values
        kern = np.exp(1j * np.outer(tau - tp, e)).sum(axis=1) / revival.tau_rev
        rhs += np.sum(kern * psi) * revival.tau_rev / m
    if state.has_continuum:
        if band is None or not (math.isfinite(band.e_min) and math.isfinite(band.e_max)):
            raise UnsupportedStateError("weak orthogonality for a continuum needs a finite band")
        a, b = band.e_min, band.e_max
        cont_only = SpectralState(np.zeros(0), state.continuum_amplitude)
        # both factors are band-limited to [a, b], so a trapezoid sum with
        # step below pi / (b - a) is exact apart from truncation
        h = 0.5 * math.pi / (b - a)
        t_max = 40.0
        prev = None
        for _ in range(6):
            n = int(t_max / h)
            tp = tau + h * np.arange(-n, n + 1)
            psi = timeline_transform(cont_only, None, band, tp, tol * 1e-2).values
            u = tau - tp
            with np.errstate(invalid="ignore", divide="ignore"):
                kern = (np.exp(1j * b * u) - np.exp(1j * a * u)) / (2j * math.pi * u)
            kern[u == 0] = (b - a) / (2 * math.pi)
            total = h * np.sum(kern * psi)
            if prev is not None and abs(total - prev) < tol:
                break
            prev = total
            t_max *= 2
        rhs += total
    return float(abs(lhs - rhs))


def povm_stats(sample: TimelineSample):
    """Mean system time, its spread and the norm from a sampled density.

    Trapezoid rule on the stored grid.

    Returns
    -------
    tau_avg, delta_tau, norm : float
    """
    t = np.asarray(sample.tau_grid, dtype=float)
    d = sample.density
    norm = float(trapezoid(d, t))
    if not norm > 0:
        raise RangeError("density has zero norm on this grid")
    avg = float(trapezoid(t * d, t)) / norm
    var = float(trapezoid((t - avg) ** 2 * d, t)) / norm
    return avg, math.sqrt(max(var, 0.0)), norm


def system_time_drift(
    state: SpectralState,
    revival: Optional[RevivalData],
    band: Optional[ContinuumBand],
    tau0: float,
    t: float,
) -> float:
    """Rate of change of the mean system time, ``1 - tau_rev |<tau0 - t|psi(0)>|^2``.

    ``tau0`` is the start of the recurrence cycle used for averaging.
    """
    if revival is not None:
        tau_rev = revival.tau_rev
    elif band is not None and band.tau_rev is not None:
        tau_rev = band.tau_rev
    else:
        raise UnsupportedStateError("system-time drift needs a recurrence time")
    v = timeline_transform(state, revival, band, [tau0 - t]).values[0]
    return float(1.0 - tau_rev * abs(v) ** 2)


def _check_unitary(u: np.ndarray) -> None:
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise RangeError("unitary must be a square matrix")
    if np.max(np.abs(u @ u.conj().T - np.eye(u.shape[0]))) > 1e-12:
        raise RangeError("matrix is not unitary to 1e-12")


def subspace_rotation(time_states: Sequence[np.ndarray], unitary) -> list:
    """Recombine degenerate time states, ``|tau^(r)> = sum_s U_rs |tau, s>``.

    Parameters
    ----------
    time_states : sequence of arrays
        One sampled wave (any common shape) per degeneracy label.
    unitary : array_like, shape (k, k)
    """
    u = np.asarray(unitary, dtype=complex)
    _check_unitary(u)
    stack = np.asarray([np.asarray(s, dtype=complex) for s in time_states])
    if stack.shape[0] != u.shape[0]:
        raise RangeError("one state per column of the unitary is required")
    out = np.tensordot(u, stack, axes=(1, 0))
    return [out[r] for r in range(out.shape[0])]


def subspace_projector(time_states: Sequence[np.ndarray]) -> np.ndarray:
    """``sum_s |tau, s><tau, s|`` as a matrix on the sample grid."""
    stack = np.asarray([np.asarray(s, dtype=complex).reshape(-1) for s in time_states])
    return stack.T @ stack.conj()
