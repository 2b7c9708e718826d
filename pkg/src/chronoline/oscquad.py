"""
Quadrature for oscillatory Fourier-type and principal-value integrals.

These routines are the numerical oracles used to check the closed forms in
:mod:`chronoline.systems` and :mod:`chronoline.timeop`.  All of them return a
:class:`QuadratureResult` carrying an error estimate and a convergence flag;
failure to converge is reported, never hidden.

Building blocks
---------------
``adaptive_gauss``
    Globally adaptive Gauss-Legendre on a finite interval (or a straight
    segment in the complex plane).
``contour_integral``
    Polyline path in the complex plane, optionally closed off by an infinite
    ray along which the integrand decays.
``oscillatory_tail``
    ``int_a^inf h`` for integrands decaying only algebraically: truncation,
    averaging over one oscillation period and Richardson extrapolation in the
    truncation point.
"""

from __future__ import annotations

import heapq
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import ConvergenceWarning, RangeError

__all__ = [
    "QuadratureResult",
    "DampingPolicy",
    "adaptive_gauss",
    "contour_integral",
    "oscillatory_tail",
    "fourier_semiaxis",
    "pv_time_moment",
    "delta_family_probe",
    "sphere_product_grid",
    "DEFAULT_MAX_EVALS",
]

DEFAULT_MAX_EVALS = 1_000_000
_SQRT_2PI = math.sqrt(2.0 * math.pi)
_NODES = {}


def _gauss(n: int):
    if n not in _NODES:
        _NODES[n] = leggauss(n)
    return _NODES[n]


@dataclass(frozen=True)
class QuadratureResult:
    """Value of a quadrature together with its diagnostics.

    Attributes
    ----------
    value : complex
        Estimated integral.
    abs_error_estimate : float
        Estimated absolute error, ``>= 0``.
    panels_used : int
        Number of panels (or truncation points) that were evaluated.
    converged : bool
        True only when ``abs_error_estimate`` met the requested tolerance.
    diagnostics : dict
        Method-specific details such as truncation radii.
    """

    value: complex
    abs_error_estimate: float
    panels_used: int
    converged: bool
    diagnostics: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not self.abs_error_estimate >= 0:
            raise ValueError("abs_error_estimate must be non-negative")
        if self.panels_used < 1:
            raise ValueError("panels_used must be >= 1")


@dataclass(frozen=True)
class DampingPolicy:
    """How a semi-infinite Fourier integral is made absolutely convergent.

    Parameters
    ----------
    kind : {"contour-rotation", "exponential-window", "none"}
        ``contour-rotation`` integrates along ``e_min + rho * exp(i angle)``
        with ``angle = strength * side``; requires an amplitude that accepts
        complex energies and is holomorphic in the swept sector.
        ``exponential-window`` multiplies by ``exp(-strength * (E - e_min))``
        and extrapolates the window to zero.
    strength : float
        Rotation angle in radians or window rate.  Zero exactly when
        ``kind == "none"``.
    side : {+1, -1} or None
        Rotation sense.  ``None`` picks ``sign(tau)``, which turns
        ``exp(i E tau)`` into a decaying exponential.
    """

    kind: str = "contour-rotation"
    strength: float = 0.01 * math.pi
    side: Optional[int] = None

    def __post_init__(self):
        if self.kind not in ("contour-rotation", "exponential-window", "none"):
            raise RangeError(f"unknown damping kind {self.kind!r}")
        if self.strength < 0 or not math.isfinite(self.strength):
            raise RangeError("damping strength must be finite and non-negative")
        if (self.strength == 0) != (self.kind == "none"):
            raise RangeError("strength must be zero exactly when kind is 'none'")
        if self.side not in (None, 1, -1):
            raise RangeError("side must be +1, -1 or None")

    @classmethod
    def none(cls) -> "DampingPolicy":
        return cls("none", 0.0)


def _check_tol(tol: float) -> None:
    if not tol > 0:
        raise RangeError("tolerance must be positive")


def _panel(f, a, b, n):
    x, w = _gauss(n)
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    return half * np.sum(w * np.asarray(f(mid + half * x)))


def adaptive_gauss(
    f: Callable,
    a,
    b,
    tol: float = 1e-10,
    order: int = 20,
    max_panels: Optional[int] = None,
    max_evals: int = DEFAULT_MAX_EVALS,
) -> QuadratureResult:
    """Globally adaptive Gauss-Legendre quadrature of ``f`` from ``a`` to ``b``.

    ``a`` and ``b`` may be complex, in which case the straight segment between
    them is used.  ``f`` must accept arrays.  Each panel is compared against
    the sum of its two halves; the difference is that panel's error estimate
    and the finer sum is kept.  The panel with the largest estimate is split
    until the total estimate is below ``tol`` or the evaluation budget runs
    out.
    """
    _check_tol(tol)
    if max_panels is None:
        max_panels = max(1, max_evals // (3 * order))

    def refine(lo, hi):
        mid = 0.5 * (lo + hi)
        coarse = _panel(f, lo, hi, order)
        left = _panel(f, lo, mid, order)
        right = _panel(f, mid, hi, order)
        fine = left + right
        return fine, float(abs(fine - coarse))

    val, err = refine(a, b)
    # heap of (-err, counter, lo, hi, value); counter keeps the order deterministic
    heap = [(-err, 0, a, b, val)]
    total, total_err = val, err
    count = 1
    while total_err > tol and count < max_panels:
        neg, _, lo, hi, v = heapq.heappop(heap)
        total -= v
        total_err += neg
        mid = 0.5 * (lo + hi)
        for x0, x1 in ((lo, mid), (mid, hi)):
            pv, pe = refine(x0, x1)
            count += 1
            heapq.heappush(heap, (-pe, count, x0, x1, pv))
            total += pv
            total_err += pe
    # re-sum in a fixed order so the result does not depend on heap history
    items = sorted(heap, key=lambda h: (np.real(h[2]), np.imag(h[2])))
    total = sum(h[4] for h in items)
    total_err = sum(-h[0] for h in items)
    return QuadratureResult(complex(total), float(total_err), len(items), bool(total_err <= tol))


def _ray(
    f,
    origin: complex,
    direction: complex,
    tol: float,
    start: float = 1.0,
    max_evals: int = DEFAULT_MAX_EVALS,
    min_extent: float = 0.0,
):
    """``int_0^inf f(origin + rho*direction) direction d rho`` on geometric panels.

    Stops after two consecutive negligible panels past ``min_extent``.
    """
    direction = complex(direction) / abs(direction)
    total = 0.0j
    err = 0.0
    panels = 0
    lo, width = 0.0, start
    quiet = 0
    evals = 0
    while evals < max_evals:
        hi = lo + width
        r = adaptive_gauss(
            lambda t: f(origin + t * direction) * direction,
            lo,
            hi,
            tol=tol / 8,
            max_evals=max_evals - evals,
        )
        evals += r.panels_used * 60
        total += r.value
        err += r.abs_error_estimate
        panels += r.panels_used
        quiet = quiet + 1 if abs(r.value) < tol / 16 and hi >= min_extent else 0
        if quiet >= 2:
            break
        lo, width = hi, width * 2.0
    return total, err, panels, quiet >= 2, lo


def contour_integral(
    f: Callable,
    vertices: Sequence[complex],
    tail_direction: Optional[complex] = None,
    tol: float = 1e-10,
    tail_start: float = 1.0,
    max_evals: int = DEFAULT_MAX_EVALS,
    min_extent: float = 0.0,
) -> QuadratureResult:
    """Integrate ``f`` along a polyline and an optional infinite ray.

    Parameters
    ----------
    f : callable
        Holomorphic integrand accepting complex arrays.
    vertices : sequence of complex
        Polyline corners, at least one.
    tail_direction : complex, optional
        Direction of the ray leaving the last vertex.  The integrand must
        decay along it.
    tail_start : float
        Length of the first tail panel; later panels double.
    min_extent : float
        The tail is never truncated before this distance along the ray.
    """
    _check_tol(tol)
    vertices = [complex(v) for v in vertices]
    segs = list(zip(vertices[:-1], vertices[1:]))
    share = tol / (len(segs) + (tail_direction is not None) + 1e-300)
    total, err, panels, ok = 0.0j, 0.0, 0, True
    for a, b in segs:
        r = adaptive_gauss(f, a, b, tol=share, max_evals=max_evals)
        total += r.value
        err += r.abs_error_estimate
        panels += r.panels_used
        ok &= r.converged
    diag = {}
    if tail_direction is not None:
        v, e, p, fin, reach = _ray(
            f, vertices[-1], tail_direction, share, tail_start, max_evals, min_extent
        )
        total += v
        err += e
        panels += p
        ok &= fin and e <= share
        diag["truncation_radius"] = reach
    return QuadratureResult(total, err, max(panels, 1), bool(ok and err <= tol), diag)


def _panel_sums(h: Callable, edges: np.ndarray, order: int):
    """Integrals of ``h`` over consecutive ``edges`` at two Gauss orders, vectorized."""
    lo, hi = edges[:-1], edges[1:]
    half = 0.5 * (hi - lo)[:, None]
    mid = 0.5 * (hi + lo)[:, None]
    out = []
    for n in (order, order + order // 2):
        x, w = _gauss(n)
        vals = np.asarray(h(mid + half * x[None, :]))
        out.append(np.sum(w[None, :] * vals * half, axis=1))
    return out[1], np.abs(out[1] - out[0])


def oscillatory_tail(
    h: Callable,
    a: float,
    period: float,
    tol: float = 1e-8,
    truncations: Sequence[float] = (64.0, 128.0, 256.0),
    analytic_tail: Optional[Callable[[float], complex]] = None,
    richardson_power: float = 1.0,
    samples_per_period: int = 8,
    order: int = 16,
) -> QuadratureResult:
    """``int_a^inf h(s) ds`` for an integrand with slowly decaying oscillations.

    Parameters
    ----------
    h : callable
        Vectorized integrand.
    a : float
        Lower limit.
    period : float
        Dominant oscillation period of ``h`` at large ``s``.
    truncations : sequence of float
        Truncation points ``T``, given in units of ``period`` past ``a``.
    analytic_tail : callable, optional
        ``analytic_tail(T)`` approximating ``int_T^inf h`` (for instance the
        non-oscillating leading term); added before extrapolation.
    richardson_power : float
        Exponent ``p`` in the assumed remainder ``c / T**p``.

    Notes
    -----
    Each partial integral ``F(T)`` is averaged over ``samples_per_period``
    equally spaced truncations covering one period, which removes the
    leading oscillation.  The last two averages are Richardson-combined; the
    change between the last two extrapolants is the error estimate.
    """
    _check_tol(tol)
    if not period > 0:
        raise RangeError("period must be positive")
    truncations = sorted(float(t) for t in truncations)
    if len(truncations) < 2:
        raise RangeError("need at least two truncation points")
    k = samples_per_period
    step = period / k
    n_total = int(math.ceil(truncations[-1] * k)) + k + 1
    edges = a + step * np.arange(n_total + 1)
    vals, errs = _panel_sums(h, edges, order)
    cum = np.concatenate([[0.0], np.cumsum(vals)])
    cum_err = np.concatenate([[0.0], np.cumsum(errs)])
    averages, points = [], []
    for t in truncations:
        i0 = int(round(t * k))
        idx = np.arange(i0, i0 + k)
        fv = cum[idx]
        if analytic_tail is not None:
            fv = fv + np.array([analytic_tail(edges[i]) for i in idx])
        averages.append(np.mean(fv))
        points.append(edges[i0] + 0.5 * period - a + 0.5 * step)
    p = richardson_power
    extrap = []
    for (t1, f1), (t2, f2) in zip(zip(points[:-1], averages[:-1]), zip(points[1:], averages[1:])):
        extrap.append((t2**p * f2 - t1**p * f1) / (t2**p - t1**p))
    value = extrap[-1]
    if len(extrap) >= 2:
        est = abs(extrap[-1] - extrap[-2])
    else:
        est = abs(averages[-1] - averages[-2])
    est += float(cum_err[-1])
    diag = {"truncations": [float(a + t * period) for t in truncations], "averages": averages}
    return QuadratureResult(complex(value), float(est), int(n_total), bool(est <= tol), diag)


def fourier_semiaxis(
    amplitude: Callable,
    tau: float,
    e_min: float,
    e_max: float = math.inf,
    tol: float = 1e-10,
    damping: DampingPolicy = DampingPolicy(),
    max_evals: int = DEFAULT_MAX_EVALS,
    extent: float = 16.0,
) -> QuadratureResult:
    """``(2 pi)^{-1/2} int_{e_min}^{e_max} exp(i E tau) amplitude(E) dE``.

    Parameters
    ----------
    amplitude : callable
        Vectorized energy amplitude.  For ``contour-rotation`` it must accept
        complex energies and be holomorphic between the real axis and the
        rotated ray.
    tau : float
        System time.
    e_min, e_max : float
        Band edges; ``e_max`` may be ``inf``.
    damping : DampingPolicy
        Only used for semi-infinite bands; finite bands are integrated on the
        real axis directly.
    extent : float
        Semi-infinite integrals are never truncated closer than this to
        ``e_min``; set it beyond the bulk of the amplitude.

    Returns
    -------
    QuadratureResult
        ``converged`` is False, and a :class:`ConvergenceWarning` is issued,
        if the tolerance was not reached.
    """
    _check_tol(tol)
    if not math.isfinite(e_min):
        raise RangeError("e_min must be finite")
    if not e_max > e_min:
        raise RangeError("e_max must exceed e_min")

    def integrand(e):
        return np.exp(1j * e * tau) * amplitude(e)

    if math.isfinite(e_max):
        r = adaptive_gauss(integrand, e_min, e_max, tol=tol * _SQRT_2PI, max_evals=max_evals)
        res = QuadratureResult(r.value / _SQRT_2PI, r.abs_error_estimate / _SQRT_2PI, r.panels_used, r.converged)
    elif damping.kind == "contour-rotation":
        side = damping.side if damping.side is not None else (1 if tau >= 0 else -1)
        direction = complex(math.cos(damping.strength), side * math.sin(damping.strength))
        r = contour_integral(
            integrand, [e_min], direction, tol=tol * _SQRT_2PI, max_evals=max_evals, min_extent=extent
        )
        res = QuadratureResult(
            r.value / _SQRT_2PI, r.abs_error_estimate / _SQRT_2PI, r.panels_used, r.converged, r.diagnostics
        )
    elif damping.kind == "exponential-window":
        vals, errs, panels = [], 0.0, 0
        eps = [damping.strength / 2**j for j in range(6)]
        for e in eps:
            r = contour_integral(
                lambda x, e=e: integrand(x) * np.exp(-e * (x - e_min)),
                [e_min],
                1.0,
                tol=tol * _SQRT_2PI / 8,
                max_evals=max_evals,
                min_extent=extent,
            )
            vals.append(r.value)
            errs += r.abs_error_estimate
            panels += r.panels_used
        # Neville extrapolation of the window rate to zero
        table = list(vals)
        prev_best = table[-1]
        for level in range(1, len(eps)):
            prev_best = table[-1]
            table = [
                (eps[i] * table[i + 1] - eps[i + level] * table[i]) / (eps[i] - eps[i + level])
                for i in range(len(table) - 1)
            ]
        v0 = table[0]
        est = (abs(v0 - prev_best) + errs) / _SQRT_2PI
        res = QuadratureResult(v0 / _SQRT_2PI, est, panels, bool(est <= tol), {"window_rates": eps})
    else:
        r = contour_integral(integrand, [e_min], 1.0, tol=tol * _SQRT_2PI, max_evals=max_evals, min_extent=extent)
        res = QuadratureResult(
            r.value / _SQRT_2PI, r.abs_error_estimate / _SQRT_2PI, r.panels_used, r.converged, r.diagnostics
        )
    if not res.converged:
        warnings.warn(
            f"fourier_semiaxis: error estimate {res.abs_error_estimate:.2e} exceeds tol {tol:.2e}",
            ConvergenceWarning,
            stacklevel=2,
        )
    return res


def _spectral_peak(h: Callable, a: float, width: float, n: int) -> Optional[float]:
    s = a + width * (np.arange(n) + 0.5) / n
    y = np.asarray(h(s), dtype=complex) * s
    y = (y - np.mean(y)) * np.hanning(n)
    spec = np.abs(np.fft.fft(y))
    spec[0] = 0.0
    k = int(np.argmax(spec))
    if spec[k] == 0:
        return None
    # parabolic refinement of the peak bin
    lo, hi = spec[(k - 1) % n], spec[(k + 1) % n]
    den = lo - 2 * spec[k] + hi
    shift = 0.5 * (lo - hi) / den if den != 0 else 0.0
    kk = k + shift
    if kk > n / 2:
        kk -= n
    return abs(kk) / width if kk != 0 else None


def _estimate_period(h: Callable, a: float, width: float, n: int = 4096) -> float:
    """Dominant oscillation period of ``h`` beyond ``a`` from the peak of its spectrum.

    ``h(s) * s`` is windowed and transformed; a second pass over a window of
    64 estimated periods sharpens the estimate.
    """
    f = _spectral_peak(h, a, width, n)
    if f is None:
        return width
    f2 = _spectral_peak(h, a, 64.0 / f, n)
    return 1.0 / (f2 if f2 else f)


def pv_time_moment(
    wave_product: Callable,
    power: int,
    tol: float = 1e-6,
    split: float = 1.0,
    inner_period: Optional[float] = None,
    truncations: Sequence[float] = (64.0, 128.0, 256.0),
) -> QuadratureResult:
    """Principal value ``lim_T int_{-T}^{T} tau**power * wave_product(tau) d tau``.

    The integrand is symmetrized, ``g(t) = t^p w(t) + (-t)^p w(-t)`` on
    ``t > 0``.  The outer part ``t > split`` is mapped by ``t = u**-2`` onto
    a finite interval (this needs ``g`` to decay faster than ``1/t``).  The
    inner part ``0 < t < split`` is mapped by ``s = 1/t`` to an oscillatory
    tail in ``s``, handled by :func:`oscillatory_tail`.

    Parameters
    ----------
    wave_product : callable
        Vectorized function of real ``tau``; it is never evaluated at 0.
    power : int
        Non-negative moment order.
    split : float
        Boundary between the inner and outer regions.
    inner_period : float, optional
        Oscillation period of ``g(1/s)`` in ``s``; estimated from zero
        crossings when omitted.
    """
    _check_tol(tol)
    if power < 0 or int(power) != power:
        raise RangeError("power must be a non-negative integer")
    p = int(power)

    def g(t):
        return t**p * wave_product(t) + (-t) ** p * wave_product(-t)

    u_max = 1.0 / math.sqrt(split)
    outer = adaptive_gauss(lambda u: 2.0 * g(1.0 / (u * u)) / u**3, 0.0, u_max, tol=tol / 4)

    def h(s):
        return g(1.0 / s) / (s * s)

    s0 = 1.0 / split
    period = inner_period if inner_period is not None else _estimate_period(h, s0, 64.0)
    inner = oscillatory_tail(h, s0, period, tol=tol / 2, truncations=truncations, richardson_power=1.0)
    err = outer.abs_error_estimate + inner.abs_error_estimate
    diag = {"split": split, "inner_period": period, "inner": inner.diagnostics}
    return QuadratureResult(
        outer.value + inner.value,
        err,
        outer.panels_used + inner.panels_used,
        bool(outer.converged and inner.converged and err <= tol),
        diag,
    )


def delta_family_probe(
    kernel_family: Callable,
    test_fn: Callable,
    x0: float,
    tol: float = 1e-6,
    param_range: tuple = (-50.0, 50.0),
    x_range: tuple = (-10.0, 10.0),
    max_evals: int = 20_000,
) -> QuadratureResult:
    """Smear a candidate delta family against a test function.

    Computes ``int dparam int dx kernel_family(param, x) test_fn(x)`` over the
    given rectangles.  The result should reproduce ``test_fn(x0)``; the
    difference is stored as ``diagnostics["residual"]``.

    The ``x`` integral uses one composite Gauss rule for every parameter,
    doubled until it resolves the kernel at the ends and middle of
    ``param_range``.  ``kernel_family(param, x)`` is called with a scalar
    parameter and an array of ``x``.  ``max_evals`` bounds the number of
    parameter values.
    """
    _check_tol(tol)
    xl, xh = x_range
    pl, ph = param_range
    order = 20
    gx, gw = _gauss(order)

    def rule(npan):
        edges = np.linspace(xl, xh, npan + 1)
        half = 0.5 * np.diff(edges)
        mid = 0.5 * (edges[1:] + edges[:-1])
        xs = (mid[:, None] + half[:, None] * gx).ravel()
        ws = (half[:, None] * gw).ravel()
        return xs, ws * test_fn(xs)

    probes = [pl, ph, 0.5 * (pl + ph), 0.75 * pl + 0.25 * ph, 0.25 * pl + 0.75 * ph]
    inner_tol = tol / (10.0 * max(1.0, ph - pl))
    npan = 8
    xs, ws = rule(npan)
    prev = np.array([np.sum(ws * kernel_family(p, xs)) for p in probes])
    while True:
        xs2, ws2 = rule(2 * npan)
        cur = np.array([np.sum(ws2 * kernel_family(p, xs2)) for p in probes])
        npan *= 2
        xs, ws = xs2, ws2
        if np.max(np.abs(cur - prev)) <= inner_tol or npan >= 4096:
            break
        prev = cur

    def inner(params):
        params = np.atleast_1d(params)
        out = np.empty(params.shape, dtype=complex)
        for idx, pv in np.ndenumerate(params):
            out[idx] = np.sum(ws * kernel_family(pv, xs))
        return out

    r = adaptive_gauss(inner, pl, ph, tol=tol, order=16, max_evals=max_evals)
    target = complex(test_fn(x0))
    diag = {"target": target, "residual": abs(r.value - target), "x_panels": npan}
    return QuadratureResult(r.value, r.abs_error_estimate, r.panels_used, r.converged, diag)


def sphere_product_grid(n_theta: int, n_phi: Optional[int] = None):
    """Product Gauss grid on the unit sphere.

    Gauss-Legendre in ``cos(theta)`` times the uniform rule in ``phi``.  Exact
    for spherical harmonics of degree ``< 2 n_theta`` when
    ``n_phi > 2 n_theta``.

    Returns
    -------
    directions : ndarray, shape (n, 3)
    weights : ndarray, shape (n,)
        Summing to ``4 pi``.
    """
    if n_phi is None:
        n_phi = 2 * n_theta + 1
    x, w = _gauss(n_theta)
    phi = 2 * np.pi * np.arange(n_phi) / n_phi
    ct, ph = np.meshgrid(x, phi, indexing="ij")
    st = np.sqrt(1.0 - ct * ct)
    dirs = np.stack([st * np.cos(ph), st * np.sin(ph), ct], axis=-1).reshape(-1, 3)
    dirs /= np.linalg.norm(dirs, axis=1)[:, None]
    weights = (w[:, None] * np.full(n_phi, 2 * np.pi / n_phi)[None, :]).reshape(-1)
    return dirs, weights
