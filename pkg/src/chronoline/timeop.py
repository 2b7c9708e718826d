"""
Time operators in the coordinate basis.

Free kernels ``<x|T|x'>`` and ``<r1|T|r2>``, the principal-value radial
integrals ``I_l`` from which they are assembled, and numerical checks of the
commutator ``[T, H]`` for periodic and free systems.
"""

from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np
from numpy.polynomial.hermite import hermgauss
from numpy.polynomial.legendre import leggauss
from numpy.typing import ArrayLike
from scipy import special as sc

from .errors import AccuracyError, ConvergenceWarning, RangeError, UnsupportedStateError
from .oscquad import QuadratureResult, sphere_product_grid
from .spectra import PhysicalParams, RevivalData, SpectralState
from .specfun import legendre_sum_kernel, sph_harm
from .timeline import timeline_transform

__all__ = [
    "KernelValue",
    "PVIntegralResult",
    "apply_T_freefall",
    "apply_H_freefall",
    "kernel_1d_free",
    "kernel_1d_from_parity",
    "pv_integral_Il",
    "kernel_3d_free",
    "kernel_3d_partial_wave",
    "commutator_periodic_term",
    "commutator_3d_check",
]

Coordinate = Union[float, np.ndarray]


@dataclass(frozen=True)
class KernelValue:
    """A single kernel matrix element ``<r1|T|r2>``."""

    value: complex
    r1: Coordinate
    r2: Coordinate

    def __complex__(self) -> complex:
        return complex(self.value)


@dataclass(frozen=True)
class PVIntegralResult:
    """Principal-value integral ``I_l(r1, r2)``.

    Attributes
    ----------
    closed_form : complex
        ``i (m/2) sgn(r1 - r2) (1/r_>) (r_</r_>)^l``.
    numeric : QuadratureResult or None
        Independent quadrature of the reduced Bessel-product integral.
    """

    l: int
    r1: float
    r2: float
    m: float
    closed_form: complex
    numeric: Optional[QuadratureResult] = None

    @property
    def discrepancy(self) -> float:
        if self.numeric is None:
            return float("nan")
        return abs(self.numeric.value - self.closed_form)


# ---------------------------------------------------------------------------
# Free fall: T = p / F acting on grid functions
# ---------------------------------------------------------------------------


def _grid_step(x: np.ndarray) -> float:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size < 9:
        raise RangeError("need a 1-D grid of at least 9 points")
    h = np.diff(x)
    if np.any(h <= 0) or np.ptp(h) > 1e-9 * abs(h[0]):
        raise RangeError("grid must be uniform and increasing")
    return float(h[0])


def _centered(psi: np.ndarray, h: float, k: int, order: int) -> np.ndarray:
    """First (order=1) or second (order=2) centered difference with step ``k h``.

    Points closer than ``k`` to an end are left at zero.
    """
    out = np.zeros_like(psi)
    n = psi.size
    c = slice(k, n - k)
    if order == 1:
        out[c] = (psi[2 * k :] - psi[: n - 2 * k]) / (2 * k * h)
    else:
        out[c] = (psi[2 * k :] - 2 * psi[c] + psi[: n - 2 * k]) / (k * h) ** 2
    return out


def _richardson_derivative(x, psi, order: int, smooth_tol: float):
    h = _grid_step(x)
    psi = np.asarray(psi, dtype=complex)
    d1 = _centered(psi, h, 1, order)
    d2 = _centered(psi, h, 2, order)
    fine = (4 * d1 - d2) / 3
    # the two ends are treated as part of the decaying tail
    fine[:2] = fine[-2:] = 0
    gap = np.abs(d1 - d2)[2:-2]
    scale = max(np.max(np.abs(fine)), np.max(np.abs(psi)) / h ** (order - 1), 1e-300)
    if gap.size and np.max(gap) > smooth_tol * scale:
        warnings.warn(
            f"refinement disagreement {np.max(gap) / scale:.2e}: input looks unresolved or non-smooth",
            ConvergenceWarning,
            stacklevel=3,
        )
    return fine


def apply_T_freefall(x: ArrayLike, psi: ArrayLike, params: PhysicalParams, smooth_tol: float = 1e-2):
    """Apply ``T = p / F`` to samples of ``psi`` on a uniform grid.

    Returns ``(1 / (i F)) dpsi/dx`` from centered differences at steps ``h``
    and ``2h`` combined by Richardson extrapolation (fourth order).  The two
    outermost points on each side are set to zero, so ``psi`` should have
    decayed there.

    Warns
    -----
    ConvergenceWarning
        If the two step sizes disagree by more than ``smooth_tol`` relative to
        the derivative scale, which flags non-smooth or under-resolved input.
    """
    if params.force is None:
        raise RangeError("free fall needs a non-zero force")
    d = _richardson_derivative(x, psi, 1, smooth_tol)
    return d / (1j * params.force)


def apply_H_freefall(x: ArrayLike, psi: ArrayLike, params: PhysicalParams, smooth_tol: float = 1e-2):
    """Apply ``H = p^2 / 2m - F x`` on a uniform grid (same scheme as :func:`apply_T_freefall`)."""
    if params.force is None:
        raise RangeError("free fall needs a non-zero force")
    x = np.asarray(x, dtype=float)
    psi = np.asarray(psi, dtype=complex)
    lap = _richardson_derivative(x, psi, 2, smooth_tol)
    return -lap / (2 * params.mass) - params.force * x * psi


# ---------------------------------------------------------------------------
# Free-particle kernels
# ---------------------------------------------------------------------------


def kernel_1d_free(x: float, x_prime: float, m: float = 1.0) -> KernelValue:
    """``<x|T|x'> = i (m/4) (x + x') sgn(x - x')``, zero on the diagonal."""
    x, xp = float(x), float(x_prime)
    return KernelValue(1j * (m / 4) * (x + xp) * float(np.sign(x - xp)), x, xp)


def _il_closed(l: int, r1: float, r2: float, m: float) -> complex:
    if r1 == r2:
        return 0j
    lo, hi = min(r1, r2), max(r1, r2)
    return 1j * (m / 2) * math.copysign(1.0, r1 - r2) / hi * (lo / hi) ** l


def kernel_1d_from_parity(x: float, x_prime: float, m: float = 1.0) -> KernelValue:
    """Free 1-D kernel rebuilt from its odd and even parity channels.

    ``(1/2) x x' I_0(|x|, |x'|) + (1/2) |x| |x'| I_{-1}(|x|, |x'|)``.
    """
    x, xp = float(x), float(x_prime)
    ax, axp = abs(x), abs(xp)
    if ax == 0 or axp == 0:
        # both channels carry an explicit factor of the coordinate
        return kernel_1d_free(x, xp, m)
    odd = 0.5 * x * xp * _il_closed(0, ax, axp, m)
    even = 0.5 * ax * axp * _il_closed(-1, ax, axp, m)
    return KernelValue(odd + even, x, xp)


def _reduced_integrand(alpha, a1, a2, delta):
    def g(s):
        j = sc.jv(alpha + 1, s * a1) * sc.jv(alpha, s * a2) - sc.jv(alpha + 1, s * a2) * sc.jv(alpha, s * a1)
        return np.sin(s * delta) * j / s

    return g


def _il_numeric(l: int, r1: float, r2: float, m: float, s_max: float = 200.0, order: int = 40) -> QuadratureResult:
    """Quadrature of the reduced form of ``I_l``.

    ``I_l = i m sqrt(r1 r2) / (2 D) int_0^inf sin(s D) [J_{a+1}(s A1) J_a(s A2) - J_{a+1}(s A2) J_a(s A1)] ds/s``
    with ``A_i = r_i^2``, ``D = A1 - A2`` and ``a = (l - 1/2)/2``.  The
    integral is scale free, so it is evaluated with ``max(A1, A2) = 1``.  The
    non-oscillating ``1/s^2`` part of the integrand is integrated analytically
    beyond the cut-off ``S``, the remainder is averaged over one period of
    ``sin(s D)``, and cut-offs ``S`` and ``2S`` are combined by Richardson
    extrapolation.
    """
    alpha = 0.5 * (l - 0.5)
    scale = max(r1, r2)
    q1, q2 = r1 / scale, r2 / scale
    a1, a2 = q1 * q1, q2 * q2
    delta = a1 - a2
    g = _reduced_integrand(alpha, a1, a2, delta)
    # the far-field form needs s * min(A) >> 1
    s_lo = s_max * max(1.0, 1.0 / min(a1, a2))
    period = math.pi / abs(delta)
    n_avg = 8
    step = period / n_avg
    h = step / math.ceil(step / 0.5)
    xg, wg = leggauss(order)

    # s = u^2 on [0, 1] removes the s^{-1/2} endpoint behaviour for l = -1
    u = 0.5 * (xg + 1)
    head = float(np.sum(0.5 * wg * 2 * u * g(u * u)))

    s_top = 2 * s_lo + period
    n_pan = int(math.ceil((s_top - 1.0) / h))
    edges = 1.0 + h * np.arange(n_pan + 1)
    cum = np.empty(n_pan + 1)
    cum[0] = head
    chunk = 4096
    for i0 in range(0, n_pan, chunk):
        lo = edges[i0 : min(i0 + chunk, n_pan)]
        s = lo[:, None] + 0.5 * h * (xg[None, :] + 1)
        cum[i0 + 1 : i0 + 1 + lo.size] = 0.5 * h * (g(s) @ wg)
    cum = np.cumsum(cum)

    def averaged(s_cut):
        i0 = int(round((s_cut - 1.0) / h))
        idx = i0 + np.arange(n_avg) * int(round(step / h))
        s_vals = edges[idx]
        return float(np.mean(cum[idx] + 1.0 / (math.pi * q1 * q2 * s_vals)))

    v1, v2 = averaged(s_lo), averaged(2 * s_lo)
    ext = (4 * v2 - v1) / 3
    pref = 1j * m * math.sqrt(r1 * r2) / (2 * (r1 * r1 - r2 * r2))
    err = abs(pref) * abs(v2 - v1)
    return QuadratureResult(
        complex(pref * ext),
        float(err),
        n_pan + 1,
        True,
        {"cutoff": 2 * s_lo, "panel_width": h, "raw": (pref * v1, pref * v2)},
    )


def pv_integral_Il(l: int, r1: float, r2: float, m: float = 1.0, with_numeric: bool = False, tol: float = 1e-4) -> PVIntegralResult:
    """Principal-value radial integral ``I_l(r1, r2) = P int tau Xi^l_tau(r1) conj(Xi^l_tau(r2)) dtau``.

    Parameters
    ----------
    l : int
        Orbital index, ``l >= -1``; ``l = -1`` and ``0`` are the even and odd
        1-D channels.
    r1, r2 : float
        Positive radii.
    with_numeric : bool
        Also evaluate the reduced Bessel-product integral by quadrature.
    tol : float
        Agreement required between the two; larger gaps mark the numeric
        result as not converged and emit a warning.
    """
    l = int(l)
    if l < -1:
        raise RangeError("l must be >= -1")
    r1, r2 = float(r1), float(r2)
    if not (r1 > 0 and r2 > 0):
        raise RangeError("radii must be positive")
    closed = _il_closed(l, r1, r2, m)
    num = None
    if with_numeric:
        if r1 == r2:
            num = QuadratureResult(0j, 0.0, 1, True)
        else:
            num = _il_numeric(l, r1, r2, m)
            if abs(num.value - closed) > tol or num.abs_error_estimate > tol:
                num = QuadratureResult(num.value, num.abs_error_estimate, num.panels_used, False, num.diagnostics)
                warnings.warn(f"I_{l} quadrature did not reach {tol:g}", ConvergenceWarning, stacklevel=2)
    return PVIntegralResult(l, r1, r2, float(m), closed, num)


def _vec3(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape != (3,):
        raise RangeError("expected a 3-vector")
    return v


def kernel_3d_free(r1: ArrayLike, r2: ArrayLike, m: float = 1.0) -> KernelValue:
    """``<r1|T|r2> = i (m / 8 pi) (r1.r1 - r2.r2) / |r1 - r2|^3``.

    Raises
    ------
    RangeError
        At coincident points, where the kernel is singular.
    """
    a, b = _vec3(r1), _vec3(r2)
    d = np.linalg.norm(a - b)
    if d == 0:
        raise RangeError("kernel is singular at coincident points")
    return KernelValue(1j * m / (8 * math.pi) * (a @ a - b @ b) / d**3, a, b)


def kernel_3d_partial_wave(r1: ArrayLike, r2: ArrayLike, m: float = 1.0, l_max: Optional[int] = None) -> KernelValue:
    """3-D free kernel from its partial-wave expansion ``sum_l I_l(r1, r2) sum_m Y_l^m(r1_hat) conj(Y_l^m(r2_hat))``.

    With ``l_max=None`` the Legendre series is summed in closed form;
    otherwise it is truncated at ``l_max`` and the spherical harmonics are
    evaluated term by term.
    """
    a, b = _vec3(r1), _vec3(r2)
    n1, n2 = np.linalg.norm(a), np.linalg.norm(b)
    if n1 == 0 or n2 == 0:
        raise RangeError("partial-wave form needs non-zero radii")
    if n1 == n2:
        return KernelValue(0j, a, b)
    u1, u2 = a / n1, b / n2
    lo, hi = min(n1, n2), max(n1, n2)
    t = lo / hi
    sgn = math.copysign(1.0, n1 - n2)
    if l_max is None:
        gamma = math.acos(float(np.clip(u1 @ u2, -1.0, 1.0)))
        val = 1j * (m / 2) * sgn / hi * legendre_sum_kernel(t, gamma) / (2 * math.pi)
        return KernelValue(complex(val), a, b)
    total = 0j
    for l in range(int(l_max) + 1):
        ang = sum(sph_harm(l, ml, u1) * np.conj(sph_harm(l, ml, u2)) for ml in range(-l, l + 1))
        total += _il_closed(l, n1, n2, m) * ang
    return KernelValue(complex(total), a, b)


# ---------------------------------------------------------------------------
# Commutators
# ---------------------------------------------------------------------------


def commutator_periodic_term(state: SpectralState, revival: RevivalData, tau0: float) -> complex:
    """``<psi|[T(tau0), H]|psi> = i - i tau_rev |<tau0|psi>|^2`` for a periodic system."""
    if state.has_continuum:
        raise UnsupportedStateError("periodic commutator needs a purely discrete state")
    amp = timeline_transform(state, revival, None, [float(tau0)]).values[0]
    return complex(1j - 1j * revival.tau_rev * abs(amp) ** 2)


def _laplacian_fd(f: Callable, pts: np.ndarray, h: float = 2e-3) -> np.ndarray:
    """Fourth-order finite-difference Laplacian of a vectorized ``f``."""
    acc = -3 * 30.0 * f(pts)
    for axis in range(3):
        e = np.zeros(3)
        e[axis] = h
        acc = acc + 16.0 * (f(pts + e) + f(pts - e)) - (f(pts + 2 * e) + f(pts - 2 * e))
    return acc / (12.0 * h * h)


def _thread_count() -> int:
    env = os.environ.get("CHRONOLINE_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def _commutator_quadrature(f, g, lap_f, lap_g, width, n_r, n_d, n_theta, d_max):
    # centre of mass on a Gauss-Hermite product grid scaled to the test functions
    xh, wh = hermgauss(n_r)
    xh = xh * width
    wh = wh * np.exp(xh / width * xh / width) * width
    centres = np.stack(np.meshgrid(xh, xh, xh, indexing="ij"), -1).reshape(-1, 3)
    w_c = (wh[:, None, None] * wh[None, :, None] * wh[None, None, :]).reshape(-1)
    # separation: radius on Gauss-Legendre, direction on a product sphere grid
    xd, wd = leggauss(n_d)
    rho = 0.5 * d_max * (xd + 1)
    w_rho = 0.5 * d_max * wd
    dirs, w_dir = sphere_product_grid(n_theta)
    sep = (rho[:, None, None] * dirs[None, :, :]).reshape(-1, 3)
    w_sep = (w_rho[:, None] * w_dir[None, :]).reshape(-1)
    dir_idx = np.tile(np.arange(len(dirs)), n_d)

    def one(i):
        c = centres[i]
        p1 = c + 0.5 * sep
        p2 = c - 0.5 * sep
        body = np.conj(lap_f(p1)) * g(p2) - np.conj(f(p1)) * lap_g(p2)
        # K d^3d = i (m / 4 pi) (R . d_hat) drho dOmega; the 1/2m prefactor cancels m
        proj = dirs[dir_idx] @ c
        return w_c[i] * np.sum(w_sep * proj * body)

    n_thr = min(_thread_count(), len(centres))
    if n_thr > 1:
        with ThreadPoolExecutor(n_thr) as ex:
            parts = list(ex.map(one, range(len(centres))))
    else:
        parts = [one(i) for i in range(len(centres))]
    # fixed summation order independent of scheduling
    return 1j / (8 * math.pi) * complex(math.fsum(p.real for p in parts) + 1j * math.fsum(p.imag for p in parts))


def commutator_3d_check(
    f: Callable,
    g: Callable,
    m: float = 1.0,
    tol: float = 5e-3,
    lap_f: Optional[Callable] = None,
    lap_g: Optional[Callable] = None,
    width: float = 1.0,
    resolution: tuple = (8, 16, 8),
) -> complex:
    """Numerical ``<f|[T, H]|g>`` for the free 3-D kernel.

    The Laplacians of ``(1/2m)(lap_1 - lap_2) K`` are moved onto the test
    functions by parts, and the double integral is taken in centre-of-mass
    ``R`` and separation ``d`` coordinates, where ``K d^3d`` is bounded.  The
    expected result is ``i <f|g>``, independent of ``m``.

    Parameters
    ----------
    f, g : callable
        Vectorized test functions mapping points of shape ``(n, 3)`` to
        complex values; must decay like Gaussians.
    m : float
        Mass.  It cancels from the result and is only validated.
    tol : float
        The quadrature is repeated on a finer grid; if the two disagree by
        more than ``tol`` an :class:`~chronoline.errors.AccuracyError` is
        raised.
    lap_f, lap_g : callable, optional
        Exact Laplacians; finite differences are used when omitted.
    width : float
        Length scale of the test functions, sets the grids.
    resolution : tuple of int
        ``(n_r, n_d, n_theta)`` of the coarser grid.
    """
    if not m > 0:
        raise RangeError("mass must be positive")
    lap_f = lap_f or (lambda p: _laplacian_fd(f, p))
    lap_g = lap_g or (lambda p: _laplacian_fd(g, p))
    n_r, n_d, n_th = resolution
    d_max = 12.0 * width
    coarse = _commutator_quadrature(f, g, lap_f, lap_g, width, n_r, n_d, n_th, d_max)
    fine = _commutator_quadrature(f, g, lap_f, lap_g, width, n_r + 2, n_d + 8, n_th + 4, d_max)
    if abs(fine - coarse) > tol:
        raise AccuracyError(f"commutator quadrature unresolved: grids differ by {abs(fine - coarse):.2e}")
    return fine
