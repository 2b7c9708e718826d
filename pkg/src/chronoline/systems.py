"""
Closed-form timeline waves for free fall and the free particle in one and
three dimensions, together with their defining integrals evaluated by
quadrature.

Conventions: hbar = 1, ``Xi_tau(x) = <x|tau>``.  For the directional and
universal waves ``z = sqrt(m / (i tau))`` with ``arg z = -pi/4`` when
``tau > 0`` and ``+pi/4`` when ``tau < 0``.  For the parity and radial waves
``z = m / (4 tau)``, placed at ``arg z = pi`` when ``tau < 0``.

The closed forms broadcast over the coordinate and ``tau``.

Every ``*_integral`` function returns a
:class:`~chronoline.oscquad.QuadratureResult` computed without using any of
the closed forms.  The wave-number integrals are taken along steepest-descent
paths: the real axis up to the stationary point ``k_s = m x / tau`` and then
the ray ``k_s + rho exp(-i pi/4 sgn tau)``, on which the Gaussian factor
``exp(-i k^2 tau / 2m)`` decays monotonically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.typing import ArrayLike
from scipy import special as sc

from .errors import RangeError, SingularTimeError
from .oscquad import QuadratureResult, contour_integral
from .spectra import PhysicalParams
from .specfun import BranchedArgument, bessel_j_scaled, parabolic_cylinder_d, sph_harm

__all__ = [
    "WaveKind",
    "freefall_wave",
    "free1d_directional_wave",
    "free1d_parity_wave",
    "free3d_radial_wave",
    "free3d_universal_wave",
    "universal_from_partial_waves",
    "universal_coordinate",
    "evaluate_wave",
    "freefall_integral",
    "free1d_directional_integral",
    "free1d_parity_integral",
    "free3d_radial_integral",
    "free3d_universal_integral",
    "transition_width",
]

WAVE_TAGS = (
    "freefall",
    "free1d_right",
    "free1d_left",
    "free1d_even",
    "free1d_odd",
    "free3d_radial",
    "free3d_universal",
)


@dataclass(frozen=True)
class WaveKind:
    """Which timeline wave to evaluate; ``l`` only for ``free3d_radial``."""

    tag: str
    l: int = 0

    def __post_init__(self):
        if self.tag not in WAVE_TAGS:
            raise RangeError(f"unknown wave kind {self.tag!r}")
        if self.tag == "free3d_radial" and self.l < 0:
            raise RangeError("orbital quantum number must be >= 0")


def _tau_ok(tau):
    t = np.asarray(tau, dtype=float)
    if np.any(t == 0) or np.any(~np.isfinite(t)):
        raise SingularTimeError("closed form is singular at tau = 0")
    return float(t) if t.ndim == 0 else t


def _z_sqrt(m: float, tau) -> BranchedArgument:
    """``sqrt(m / (i tau))`` for scalar or array ``tau``."""
    if np.ndim(tau) == 0:
        return BranchedArgument.sqrt_m_over_i_tau(m, tau)
    return BranchedArgument(np.sqrt(m / np.abs(tau)), np.where(tau > 0, -0.25 * math.pi, 0.25 * math.pi))


def _z_quarter(m: float, tau) -> BranchedArgument:
    """``m / (4 tau)`` for scalar or array ``tau``."""
    if np.ndim(tau) == 0:
        return BranchedArgument.m_over_4tau(m, tau)
    return BranchedArgument(m / (4.0 * np.abs(tau)), np.where(tau > 0, 0.0, math.pi))


def _mass_ok(m: float) -> float:
    m = float(m)
    if not (m > 0 and math.isfinite(m)):
        raise RangeError("mass must be positive")
    return m


def _out(v):
    v = np.asarray(v)
    return v[()] if v.ndim == 0 else v


# ---------------------------------------------------------------------------
# Closed forms
# ---------------------------------------------------------------------------


def freefall_wave(x: ArrayLike, tau: ArrayLike, params: PhysicalParams):
    """Free-fall timeline wave ``sqrt(|F|/2pi) exp(i F x tau - i F^2 tau^3 / 6m)``.

    Entire in both arguments; ``tau = 0`` is allowed.
    """
    if params.force is None:
        raise RangeError("free fall needs a non-zero force")
    f, m = params.force, params.mass
    x = np.asarray(x, dtype=float)
    tau = np.asarray(tau, dtype=float)
    return _out(math.sqrt(abs(f) / (2 * math.pi)) * np.exp(1j * (f * x * tau - f * f * tau**3 / (6 * m))))


def free1d_directional_wave(direction: str, x: ArrayLike, tau: ArrayLike, m: float = 1.0):
    """Running-wave timeline ``Xi^{->}`` (``direction="right"``) or ``Xi^{<-}``.

    ``(4 sqrt(pi m))^{-1} z^{3/2} exp(-x^2 z^2 / 4) D_{-3/2}(-+ i x z)``.
    """
    if direction not in ("right", "left"):
        raise RangeError("direction must be 'right' or 'left'")
    tau, m = _tau_ok(tau), _mass_ok(m)
    z = _z_sqrt(m, tau)
    x = np.asarray(x, dtype=float)
    sgn = -1.0 if direction == "right" else 1.0
    w = sgn * 1j * x * z.value
    # z^2 = -i m / tau exactly, so exp(-x^2 z^2 / 4) is a pure phase
    gauss = np.exp(1j * x * x * m / (4 * tau))
    pref = z.power(1.5) / (4 * math.sqrt(math.pi * m))
    return _out(pref * gauss * parabolic_cylinder_d(-1.5, w))


def _bessel_pair(alpha: float, r: np.ndarray, z: BranchedArgument):
    """``exp(i w) [J_{alpha+1}(w) - i J_alpha(w)] / (z/2)^alpha`` with ``w = r^2 z``.

    The factor ``r^{2 alpha}`` is left out so that callers can cancel powers of
    ``r`` before multiplying, which keeps ``r = 0`` finite.
    """
    w = z.scaled(r * r)
    half_w = 0.5 * w.value
    pair = half_w * bessel_j_scaled(alpha + 1, w) - 1j * bessel_j_scaled(alpha, w)
    return np.exp(1j * w.value) * pair


def _radial_core(alpha: float, r: np.ndarray, tau: float, m: float, extra_power: float):
    """``r^{extra_power + 1/2} sqrt(4/m) z^{3/2} e^{i r^2 z - i pi (2 alpha + 1)/4} [J_{alpha+1} - i J_alpha]``."""
    z = _z_quarter(m, tau)
    zalpha = z.power(alpha) * 2.0**-alpha
    pair = _bessel_pair(alpha, r, z)
    power = 0.5 + 2 * alpha + extra_power
    with np.errstate(divide="ignore", invalid="ignore"):
        rp = np.where(r == 0, 1.0 if power == 0 else 0.0, np.abs(r) ** power)
    phase = np.exp(-1j * math.pi * (2 * alpha + 1) / 4)
    return math.sqrt(4.0 / m) * z.power(1.5) * zalpha * phase * rp * pair


def free1d_parity_wave(parity: str, x: ArrayLike, tau: ArrayLike, m: float = 1.0):
    """Standing-wave timeline ``Xi^+`` (even) or ``Xi^-`` (odd).

    For ``x >= 0``,
    ``sqrt(2/m) (x z)^{3/2} exp(i x^2 z -+ i pi/8) [J_{3/4} - i J_{-1/4}]`` (odd) and
    ``[J_{1/4} - i J_{-3/4}]`` (even), argument ``x^2 z``; extended to
    ``x < 0`` by parity.
    """
    if parity not in ("even", "odd"):
        raise RangeError("parity must be 'even' or 'odd'")
    tau, m = _tau_ok(tau), _mass_ok(m)
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    alpha = -0.75 if parity == "even" else -0.25
    # Xi^{-+} = (x / sqrt 2) Xi^{l} with l = 0 (odd) or l = -1 (even)
    val = _radial_core(alpha, ax, tau, m, extra_power=1.0) / math.sqrt(2.0)
    if parity == "odd":
        val = np.where(x < 0, -val, val)
    return _out(val)


def free3d_radial_wave(l: int, r: ArrayLike, tau: ArrayLike, m: float = 1.0):
    """Radial timeline wave of orbital quantum number ``l``.

    ``sqrt(4r/m) z^{3/2} exp(i r^2 z - i pi (2 alpha + 1)/4) [J_{alpha+1}(r^2 z) - i J_alpha(r^2 z)]``
    with ``2 alpha = l - 1/2`` and ``z = m / 4 tau``.
    """
    l = int(l)
    if l < 0:
        raise RangeError("l must be >= 0")
    tau, m = _tau_ok(tau), _mass_ok(m)
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise RangeError("r must be positive")
    alpha = 0.5 * (l - 0.5)
    return _out(_radial_core(alpha, r, tau, m, extra_power=0.0))


def free3d_universal_wave(xi: ArrayLike, tau: ArrayLike, m: float = 1.0):
    """Universal plane-front timeline ``Xi_tau(xi)``, ``xi = k_hat . r``.

    ``3 / (16 sqrt(pi^3 m)) z^{5/2} exp(-xi^2 z^2 / 4) D_{-5/2}(-i xi z)``.
    """
    tau, m = _tau_ok(tau), _mass_ok(m)
    z = _z_sqrt(m, tau)
    xi = np.asarray(xi, dtype=float)
    gauss = np.exp(1j * xi * xi * m / (4 * tau))
    pref = 3.0 / (16.0 * math.sqrt(math.pi**3 * m)) * z.power(2.5)
    return _out(pref * gauss * parabolic_cylinder_d(-2.5, -1j * xi * z.value))


def universal_coordinate(k_hat: ArrayLike, r_vec: ArrayLike) -> float:
    """``xi = k_hat . r`` for a unit ``k_hat``."""
    k = np.asarray(k_hat, dtype=float)
    if abs(np.linalg.norm(k) - 1.0) > 1e-12:
        raise RangeError("k_hat must be a unit vector")
    return float(np.dot(k, np.asarray(r_vec, dtype=float)))


def universal_from_partial_waves(k_hat: ArrayLike, r_vec: ArrayLike, tau: float, m: float = 1.0, l_max: int = 16):
    """Partial-wave sum ``sum_{l <= l_max} i^l Xi^l(r) sum_m Y_l^m(r_hat) conj(Y_l^m(k_hat))``."""
    if l_max < 0:
        raise RangeError("l_max must be >= 0")
    k = np.asarray(k_hat, dtype=float)
    if abs(np.linalg.norm(k) - 1.0) > 1e-12:
        raise RangeError("k_hat must be a unit vector")
    rv = np.asarray(r_vec, dtype=float)
    r = float(np.linalg.norm(rv))
    if r == 0:
        raise RangeError("r_vec must be non-zero")
    r_hat = rv / r
    total = 0.0j
    for l in range(l_max + 1):
        ang = sum(sph_harm(l, ml, r_hat) * np.conj(sph_harm(l, ml, k)) for ml in range(-l, l + 1))
        total += (1j) ** l * free3d_radial_wave(l, r, tau, m) * ang
    return complex(total)


def evaluate_wave(kind: WaveKind, coord: ArrayLike, tau: float, params: PhysicalParams):
    """Dispatch on ``kind`` to the closed-form wave."""
    m = params.mass
    if kind.tag == "freefall":
        return freefall_wave(coord, tau, params)
    if kind.tag in ("free1d_right", "free1d_left"):
        return free1d_directional_wave(kind.tag[7:], coord, tau, m)
    if kind.tag in ("free1d_even", "free1d_odd"):
        return free1d_parity_wave(kind.tag[7:], coord, tau, m)
    if kind.tag == "free3d_radial":
        return free3d_radial_wave(kind.l, coord, tau, m)
    return free3d_universal_wave(coord, tau, m)


# ---------------------------------------------------------------------------
# Integral representations evaluated by quadrature
# ---------------------------------------------------------------------------


def _descent(amp: Callable, s: float, x: float, tau: float, m: float, k0: float, tol: float) -> QuadratureResult:
    """``int_{k0}^inf amp(k) exp(i s k x - i k^2 tau / 2m) dk`` on a steepest-descent path."""
    ks = s * m * x / tau
    direction = np.exp(-0.25j * math.pi * math.copysign(1.0, tau))

    def f(k):
        return amp(k) * np.exp(1j * s * k * x - 0.5j * k * k * tau / m)

    verts = [k0] + ([ks] if ks > k0 else [])
    width = math.sqrt(2 * m / abs(tau))
    return contour_integral(f, verts, direction, tol=tol, tail_start=width)


def _combine(parts, scale) -> QuadratureResult:
    val = sum(p.value for p in parts) * scale
    err = sum(p.abs_error_estimate for p in parts) * abs(scale)
    return QuadratureResult(
        complex(val),
        float(err),
        sum(p.panels_used for p in parts),
        all(p.converged for p in parts),
    )


def free1d_directional_integral(direction: str, x: float, tau: float, m: float = 1.0, tol: float = 1e-12):
    """``(2 pi sqrt m)^{-1} int_0^inf sqrt(k) exp(+-i k x - i k^2 tau / 2m) dk``."""
    tau, m = _tau_ok(tau), _mass_ok(m)
    s = 1.0 if direction == "right" else -1.0
    r = _descent(np.sqrt, s, float(x), tau, m, 0.0, tol)
    return _combine([r], 1.0 / (2 * math.pi * math.sqrt(m)))


def free3d_universal_integral(xi: float, tau: float, m: float = 1.0, tol: float = 1e-12):
    """``(4 pi^2 sqrt m)^{-1} int_0^inf k^{3/2} exp(i k xi - i k^2 tau / 2m) dk``.

    Divergent on the real ``k`` axis; the steepest-descent path supplies
    the analytic continuation from ``Im tau < 0``.
    """
    tau, m = _tau_ok(tau), _mass_ok(m)
    r = _descent(lambda k: k**1.5, 1.0, float(xi), tau, m, 0.0, tol)
    return _combine([r], 1.0 / (4 * math.pi**2 * math.sqrt(m)))


def _hankel_half(l: int, x, kind: int):
    """``H^{(kind)}_{l+1/2}(x)`` for ``l >= -1`` from its terminating expansion."""
    x = np.asarray(x, dtype=complex)
    sgn = 1.0 if kind == 1 else -1.0
    root = np.sqrt(2.0 / (np.pi * x))
    if l == -1:
        return root * np.exp(sgn * 1j * x)
    total = np.zeros_like(x)
    for k in range(l + 1):
        c = math.factorial(l + k) / (math.factorial(k) * math.factorial(l - k))
        total = total + c * (sgn * 1j) ** k / (2 * x) ** k
    return root * (-sgn * 1j) ** (l + 1) * np.exp(sgn * 1j * x) * total


def _bessel_integral(l: int, r: float, tau: float, m: float, tol: float) -> QuadratureResult:
    """``int_0^inf exp(-i k^2 tau / 2m) k J_{l+1/2}(k r) dk`` for ``l >= -1``.

    Real axis with scipy's ``jv`` up to ``k_a = (l + 2) / r``; beyond, the two
    Hankel halves are sent along their own descent paths.
    """
    nu = l + 0.5
    ka = (l + 2.0) / r
    head = contour_integral(
        lambda k: k * sc.jv(nu, np.real(k) * r) * np.exp(-0.5j * k * k * tau / m),
        [0.0, ka],
        tol=tol / 3,
    )
    h1 = _descent(lambda k: 0.5 * k * _hankel_half(l, k * r, 1) * np.exp(-1j * k * r), 1.0, r, tau, m, ka, tol / 3)
    h2 = _descent(lambda k: 0.5 * k * _hankel_half(l, k * r, 2) * np.exp(1j * k * r), -1.0, r, tau, m, ka, tol / 3)
    return _combine([head, h1, h2], 1.0)


def free1d_parity_integral(parity: str, x: float, tau: float, m: float = 1.0, tol: float = 1e-12):
    """``sqrt(x) / (2 sqrt(pi m)) int_0^inf k exp(-i k^2 tau / 2m) J_{-+1/2}(k x) dk`` for ``x > 0``.

    Negative ``x`` is handled by parity; ``x = 0`` returns the parity limit
    (zero for the odd wave, the ``x -> 0`` value of the even integral).
    """
    tau, m = _tau_ok(tau), _mass_ok(m)
    ax = abs(float(x))
    if ax == 0:
        if parity == "odd":
            return QuadratureResult(0j, 0.0, 1, True)
        # sqrt(x) J_{-1/2}(k x) -> sqrt(2 / (pi k)) as x -> 0
        r = _descent(lambda k: np.sqrt(2.0 * k / np.pi), 1.0, 0.0, tau, m, 0.0, tol)
        return _combine([r], 1.0 / (2 * math.sqrt(math.pi * m)))
    l = -1 if parity == "even" else 0
    res = _bessel_integral(l, ax, tau, m, tol)
    scale = math.sqrt(ax) / (2 * math.sqrt(math.pi * m))
    if parity == "odd" and x < 0:
        scale = -scale
    return _combine([res], scale)


def free3d_radial_integral(l: int, r: float, tau: float, m: float = 1.0, tol: float = 1e-12):
    """``(2 pi m r)^{-1/2} int_0^inf exp(-i k^2 tau / 2m) k J_{l+1/2}(k r) dk``."""
    tau, m = _tau_ok(tau), _mass_ok(m)
    if not r > 0:
        raise RangeError("r must be positive")
    res = _bessel_integral(int(l), float(r), tau, m, tol)
    return _combine([res], 1.0 / math.sqrt(2 * math.pi * m * r))


def _airy_fourier(omega: float, tol: float) -> QuadratureResult:
    """``int_{-inf}^{inf} Ai(-u) exp(-i omega u) du`` by contour rotation.

    The real axis is followed past the saddle at ``u = omega^2``; beyond it
    the connection formula
    ``Ai(-u) = e^{-i pi/3} Ai(u e^{-i pi/3}) + e^{i pi/3} Ai(u e^{i pi/3})``
    splits the oscillating Airy function into two pieces, each sent along a
    ray on which it decays.
    """

    def ai(zeta):
        return sc.airy(zeta)[0]

    u0 = omega * omega + 2.0
    width = max(1.0, u0**0.25)
    # ray from 0 towards -inf runs against the orientation of the u axis
    neg = _combine(
        [contour_integral(lambda u: ai(-u) * np.exp(-1j * omega * u), [0.0], -1.0, tol=tol / 4, tail_start=2.0)], -1.0
    )
    mid = contour_integral(lambda u: ai(-np.real(u)) * np.exp(-1j * omega * u), [0.0, u0], tol=tol / 4)
    e_m, e_p = np.exp(-1j * np.pi / 3), np.exp(1j * np.pi / 3)
    p1 = contour_integral(
        lambda u: e_m * ai(u * e_m) * np.exp(-1j * omega * u), [u0], e_p, tol=tol / 4, tail_start=width
    )
    p2 = contour_integral(
        lambda u: e_p * ai(u * e_p) * np.exp(-1j * omega * u), [u0], e_m, tol=tol / 4, tail_start=width
    )
    return _combine([neg, mid, p1, p2], 1.0)


def freefall_integral(x: float, tau: float, params: PhysicalParams, tol: float = 1e-12) -> QuadratureResult:
    """``sqrt(kappa^2 / (2 pi |F|)) int dE exp(-i E tau) Ai(-kappa x - kappa E / F)``.

    ``kappa`` carries the sign of ``F`` here, so that the Airy function decays
    on the classically forbidden side for either sign of the force.  The
    substitution ``u = kappa (x + E/F)`` maps the integral onto the Fourier
    transform of ``Ai(-u)``.
    """
    if params.force is None:
        raise RangeError("free fall needs a non-zero force")
    f = params.force
    kappa = math.copysign(params.kappa, f)
    omega = f * float(tau) / kappa
    ft = _airy_fourier(omega, tol)
    # dE = (F / kappa) du, orientation preserved since F / kappa > 0
    scale = math.sqrt(kappa**2 / (2 * math.pi * abs(f))) * (f / kappa) * np.exp(1j * f * float(x) * float(tau))
    return _combine([ft], scale)


# ---------------------------------------------------------------------------
# Transition region of the running waves
# ---------------------------------------------------------------------------


def transition_width(tau: float, m: float = 1.0, lo: float = 0.1, hi: float = 0.9, span: float = 8.0) -> float:
    """Width of the region where ``Xi^{->}`` switches from vanishing to growing.

    Uses the share ``s(x) = |Xi^->(x)|^2 / (|Xi^->(x)|^2 + |Xi^<-(x)|^2)``,
    which runs from 0 at ``x -> -inf`` to 1 at ``x -> +inf``, and returns the
    distance between the outermost crossings of ``lo`` and ``hi``.  ``span``
    sets the search window in units of ``sqrt(|tau| / m)``.
    """
    tau, m = _tau_ok(tau), _mass_ok(m)
    scale = math.sqrt(abs(tau) / m)
    x = np.linspace(-span * scale, span * scale, 1601)
    right = np.abs(free1d_directional_wave("right", x, tau, m)) ** 2
    left = right[::-1]  # Xi^{<-}(x) = Xi^{->}(-x) on a symmetric grid
    share = right / (right + left)
    if tau < 0:
        share = 1.0 - share

    def crossing(level, first):
        above = share >= level
        idx = np.nonzero(above[1:] != above[:-1])[0]
        if idx.size == 0:
            raise RangeError("transition not resolved on the search window")
        i = idx[0] if first else idx[-1]
        x0, x1, s0, s1 = x[i], x[i + 1], share[i], share[i + 1]
        return x0 + (level - s0) * (x1 - x0) / (s1 - s0)

    return float(crossing(hi, False) - crossing(lo, True))
