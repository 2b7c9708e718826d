"""
Special functions behind the closed-form timeline waves.

The Bessel and parabolic cylinder functions are implemented here directly so
that branch handling is explicit and auditable; the Airy function delegates to
``scipy.special.airy``.  Every routine accepts numpy arrays and broadcasts.

Branch conventions
------------------
Complex arguments whose phase matters (fractional powers, Bessel functions of
non-integer order) are passed as :class:`BranchedArgument`, a polar pair with
the argument in ``(-pi, pi]``.  Values lying on the negative real axis are
therefore approached from above, ``arg = pi``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from numpy.typing import ArrayLike
from scipy import special as sc

from .errors import AccuracyError, RangeError

__all__ = [
    "BranchedArgument",
    "airy_ai",
    "bessel_j",
    "bessel_j_scaled",
    "parabolic_cylinder_d",
    "parabolic_cylinder_d_integral",
    "sph_harm",
    "legendre_sum_kernel",
]

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class BranchedArgument:
    """Polar representation ``modulus * exp(1j * argument)`` of a complex number.

    ``modulus`` may be an array; ``argument`` may be a scalar or an array that
    broadcasts against it.  A zero modulus forces a zero argument.
    """

    modulus: Union[float, np.ndarray]
    argument: Union[float, np.ndarray] = 0.0

    def __post_init__(self):
        mod = np.asarray(self.modulus, dtype=float)
        arg = np.asarray(self.argument, dtype=float)
        if np.any(~np.isfinite(mod)) or np.any(mod < 0):
            raise RangeError("modulus must be finite and non-negative")
        if np.any(~np.isfinite(arg)) or np.any(arg <= -np.pi) or np.any(arg > np.pi):
            raise RangeError("argument must lie in (-pi, pi]")
        arg = np.where(mod == 0, 0.0, arg)
        if mod.ndim == 0 and arg.ndim == 0:
            object.__setattr__(self, "modulus", float(mod))
            object.__setattr__(self, "argument", float(arg))
        else:
            object.__setattr__(self, "modulus", mod)
            object.__setattr__(self, "argument", np.broadcast_to(arg, np.broadcast(mod, arg).shape))

    @classmethod
    def from_complex(cls, z: ArrayLike) -> "BranchedArgument":
        """Principal-branch polar form of ``z``; ``-x + 0j`` maps to ``arg = pi``."""
        z = np.asarray(z, dtype=complex)
        arg = np.angle(z)
        arg = np.where(arg == -np.pi, np.pi, arg)
        return cls(np.abs(z), arg)

    @classmethod
    def sqrt_m_over_i_tau(cls, m: float, tau: float) -> "BranchedArgument":
        """``sqrt(m / (i tau))``: ``arg = -pi/4`` for ``tau > 0``, ``+pi/4`` for ``tau < 0``."""
        _check_tau(tau)
        return cls(math.sqrt(m / abs(tau)), -math.pi / 4 if tau > 0 else math.pi / 4)

    @classmethod
    def m_over_4tau(cls, m: float, tau: float) -> "BranchedArgument":
        """``m / (4 tau)``, placed on the upper lip of the cut (``arg = pi``) for ``tau < 0``."""
        _check_tau(tau)
        return cls(m / (4.0 * abs(tau)), 0.0 if tau > 0 else math.pi)

    @property
    def value(self):
        """The complex number itself."""
        return self.modulus * np.exp(1j * np.asarray(self.argument))

    def scaled(self, factor: ArrayLike) -> "BranchedArgument":
        """Multiply by a non-negative real ``factor`` without touching the phase."""
        factor = np.asarray(factor, dtype=float)
        if np.any(factor < 0):
            raise RangeError("scale factor must be non-negative")
        return BranchedArgument(factor * self.modulus, self.argument)

    def power(self, p: float):
        """``z**p`` evaluated on this branch."""
        mod = np.asarray(self.modulus, dtype=float)
        with np.errstate(divide="ignore"):
            out = mod**p * np.exp(1j * p * np.asarray(self.argument))
        return out[()] if out.ndim == 0 else out


def _check_tau(tau: float) -> None:
    from .errors import SingularTimeError

    if tau == 0 or not math.isfinite(tau):
        raise SingularTimeError("system time tau must be finite and non-zero")


def _as_branched(arg) -> BranchedArgument:
    if isinstance(arg, BranchedArgument):
        return arg
    return BranchedArgument.from_complex(arg)


# ---------------------------------------------------------------------------
# Airy
# ---------------------------------------------------------------------------

_AIRY_MAX = 100.0
_AIRY_MIN = -1.0e4


def airy_ai(x: ArrayLike):
    """Airy function of the first kind for real argument.

    Parameters
    ----------
    x : array_like
        Real argument in ``[-1e4, 100]``.  Beyond ``x = 100`` the value
        underflows binary64 subnormals.

    Returns
    -------
    float or ndarray
    """
    x = np.asarray(x, dtype=float)
    if np.any(~np.isfinite(x)):
        raise RangeError("airy_ai requires finite arguments")
    if np.any(x > _AIRY_MAX) or np.any(x < _AIRY_MIN):
        raise RangeError(f"airy_ai supported on [{_AIRY_MIN:g}, {_AIRY_MAX:g}]")
    ai = sc.airy(x)[0]
    return ai[()] if ai.ndim == 0 else ai


# ---------------------------------------------------------------------------
# Bessel J of real order > -1
# ---------------------------------------------------------------------------

_SERIES_CAP = 12.5  # beyond this the ascending series loses > 1e-10 relative


def _j_series_scaled(alpha: float, z2: np.ndarray) -> np.ndarray:
    """``J_alpha(z) / (z/2)**alpha`` from the ascending series in ``z**2``."""
    w = -0.25 * z2
    term = np.full(z2.shape, 1.0 / sc.gamma(alpha + 1.0), dtype=complex)
    total = term.copy()
    for k in range(1, 300):
        term = term * w / (k * (alpha + k))
        total += term
        if np.all(np.abs(term) <= 1e-17 * np.abs(total)) and k > 2:
            break
    return total


def _j_hankel(alpha: float, z: np.ndarray) -> np.ndarray:
    """Hankel asymptotic expansion, ``|arg z| <= pi/2``, ``|z|`` large."""
    mu = 4.0 * alpha * alpha
    p = np.ones(z.shape, dtype=complex)
    q = np.zeros(z.shape, dtype=complex)
    term = np.ones(z.shape, dtype=complex)
    active = np.ones(z.shape, dtype=bool)
    prev = np.full(z.shape, np.inf)
    for k in range(1, 80):
        term = term * (mu - (2 * k - 1) ** 2) / (8.0 * k * z)
        size = np.abs(term)
        # asymptotic series: stop at the smallest term
        active &= size < prev
        if not np.any(active):
            break
        sign = -1.0 if (k // 2) % 2 else 1.0
        if k % 2:
            q = np.where(active, q + sign * term, q)
        else:
            p = np.where(active, p + sign * term, p)
        prev = np.where(active, size, prev)
        active &= size > 1e-17 * np.abs(p)
    chi = z - (0.5 * alpha + 0.25) * np.pi
    return np.sqrt(2.0 / (np.pi * z)) * (p * np.cos(chi) - q * np.sin(chi))


def _bessel_j_polar(alpha: float, rho, phi, scaled: bool):
    alpha = float(alpha)
    if not alpha > -1.0:
        raise RangeError("Bessel order must exceed -1")
    rho, phi = np.broadcast_arrays(np.asarray(rho, dtype=float), np.asarray(phi, dtype=float))
    # rotate into the closed right half-plane: J(z e^{+-i pi}) = e^{+-i pi alpha} J(z)
    rot = np.ones(rho.shape, dtype=complex)
    phr = phi.copy()
    up = phi > np.pi / 2
    dn = phi < -np.pi / 2
    phr[up] -= np.pi
    phr[dn] += np.pi
    rot[up] = np.exp(1j * np.pi * alpha)
    rot[dn] = np.exp(-1j * np.pi * alpha)

    out = np.empty(rho.shape, dtype=complex)
    switch = max(12.0, 2.0 * alpha * alpha)
    ser = rho < min(switch, _SERIES_CAP)
    hank = rho >= switch
    mid = ~(ser | hank)

    if np.any(ser):
        r, p = rho[ser], phr[ser]
        z2 = r * r * np.exp(2j * p)
        val = _j_series_scaled(alpha, z2)
        if not scaled:
            val = val * (0.5 * r) ** alpha * np.exp(1j * alpha * p)
        out[ser] = val
    for mask, kind in ((hank, "hankel"), (mid, "mid")):
        if not np.any(mask):
            continue
        r, p = rho[mask], phr[mask]
        z = r * np.exp(1j * p)
        if kind == "hankel":
            val = _j_hankel(alpha, z)
        else:
            # large order, moderate argument: neither regime is accurate
            val = sc.jv(alpha, z)
        if scaled:
            val = val / ((0.5 * r) ** alpha * np.exp(1j * alpha * p))
        out[mask] = val
    if not scaled:
        # the scaled function depends on z**2 only, so it needs no rotation phase
        out = out * rot
    if np.any(~np.isfinite(out)):
        raise RangeError("Bessel function not finite at the requested argument")
    return out[()] if out.ndim == 0 else out


def bessel_j(order: float, arg):
    """Bessel function of the first kind ``J_order(arg)``.

    Parameters
    ----------
    order : float
        Real order, ``order > -1``.
    arg : BranchedArgument or array_like
        Argument.  Plain numbers are placed on the principal branch, with the
        negative real axis taken from above.

    Returns
    -------
    complex or ndarray of complex

    Notes
    -----
    The ascending series is used for ``|z| < max(12, 2 order**2)`` (capped at
    12.5) and the Hankel expansion from ``max(12, 2 order**2)`` onward.
    Arguments with ``|arg z| > pi/2`` are rotated by ``pi`` using
    ``J(z e^{i pi}) = e^{i pi order} J(z)``, so that identity holds exactly.
    """
    b = _as_branched(arg)
    if order < 0 and np.any(np.asarray(b.modulus) == 0):
        raise RangeError("J of negative order is infinite at zero argument")
    return _bessel_j_polar(order, b.modulus, b.argument, scaled=False)


def bessel_j_scaled(order: float, arg):
    """Entire part ``J_order(z) / (z/2)**order`` on the branch of ``arg``.

    Finite at ``z = 0``, where it equals ``1 / Gamma(order + 1)``.
    """
    b = _as_branched(arg)
    return _bessel_j_polar(order, b.modulus, b.argument, scaled=True)


# ---------------------------------------------------------------------------
# Parabolic cylinder D_nu
# ---------------------------------------------------------------------------

_PCF_INNER = 4.0
_PCF_OUTER = 8.0
_PCF_STEP = 0.5
_PCF_MAX = 50.0


def _weber_taylor(nu: float, c: complex, y0: complex, y1: complex, h: complex, kmax: int = 400):
    """Advance ``y'' = (z^2/4 - nu - 1/2) y`` from ``c`` to ``c + h`` by Taylor series."""
    q0 = c * c / 4.0 - nu - 0.5
    a = [y0, y1 * h]  # a_k h^k, scaled to avoid overflow for large |h|
    val = a[0] + a[1]
    der = a[1]
    small = 0
    scale = max(abs(y0), abs(y1) * abs(h), 1e-300)
    for k in range(0, kmax):
        ak = a[k] * q0 * h * h
        if k >= 1:
            ak += a[k - 1] * (c / 2.0) * h**3
        if k >= 2:
            ak += a[k - 2] * 0.25 * h**4
        ak /= (k + 2) * (k + 1)
        a.append(ak)
        val += ak
        der += (k + 2) * ak
        scale = max(scale, abs(ak))
        if abs(ak) < 1e-18 * scale:
            small += 1
            if small >= 4:
                break
        else:
            small = 0
    return val, der / h


def _pcf_origin(nu: float):
    d0 = 2.0 ** (nu / 2) * math.sqrt(math.pi) * sc.rgamma((1.0 - nu) / 2)
    d1 = -(2.0 ** ((nu + 1) / 2)) * math.sqrt(math.pi) * sc.rgamma(-nu / 2)
    return complex(d0), complex(d1)


def _pcf_series_sum(nu: float, z: complex, first: bool) -> complex:
    """One of the two formal series of the large-argument expansion."""
    x = 1.0 / (2.0 * z * z)
    term = 1.0 + 0j
    total = term
    prev = math.inf
    for s in range(1, 200):
        if first:
            # (-1)^s (-nu)_{2s} / s!
            term = term * (-1.0) * (-nu + 2 * s - 2) * (-nu + 2 * s - 1) / s * x
        else:
            term = term * (1.0 + nu + 2 * s - 2) * (1.0 + nu + 2 * s - 1) / s * x
        size = abs(term)
        if size >= prev or size < 1e-17 * abs(total):
            break
        total += term
        prev = size
    return total


def _pcf_asymptotic(nu: float, z: complex) -> complex:
    phi = math.atan2(z.imag, z.real)
    if phi == -math.pi:
        phi = math.pi
    logz = complex(math.log(abs(z)), phi)
    val = np.exp(-z * z / 4.0 + nu * logz) * _pcf_series_sum(nu, z, True)
    if abs(phi) > math.pi / 2:
        # beyond the Stokes line the second (e^{z^2/4}) solution is switched on
        sgn = 1.0 if phi > 0 else -1.0
        pref = sgn * 1j * math.sqrt(2 * math.pi) * sc.rgamma(-nu) * np.exp(sgn * 1j * math.pi * (nu + 0.5))
        val += pref * np.exp(z * z / 4.0 - (nu + 1.0) * logz) * _pcf_series_sum(nu, z, False)
    return complex(val)


def _pcfd_scalar(nu: float, z: complex) -> complex:
    r = abs(z)
    if not math.isfinite(r):
        raise RangeError("parabolic_cylinder_d requires a finite argument")
    if r > _PCF_MAX:
        raise AccuracyError(f"|w| = {r:.3g} exceeds the certified range {_PCF_MAX:g}")
    if r == 0:
        return _pcf_origin(nu)[0]
    if nu >= 0 and nu == int(nu) and z.real < 0:
        # Hermite case: D_n(-z) = (-1)^n D_n(z) avoids stepping against a recessive solution
        return (-1) ** int(nu) * _pcfd_scalar(nu, -z)
    if r <= _PCF_INNER:
        d0, d1 = _pcf_origin(nu)
        return _weber_taylor(nu, 0j, d0, d1, z)[0]
    if r >= _PCF_OUTER:
        return _pcf_asymptotic(nu, z)
    u = z / r
    phi = abs(math.atan2(z.imag, z.real))
    if phi <= math.pi / 4:
        # recessive sector: integrate inward from the asymptotic radius
        c = _PCF_OUTER * u
        y = _pcf_asymptotic(nu, c)
        dy = -0.5 * c * y + nu * _pcf_asymptotic(nu - 1.0, c)
        target = r
        radius = _PCF_OUTER
        while radius > target:
            step = min(_PCF_STEP, radius - target)
            y, dy = _weber_taylor(nu, radius * u, y, dy, -step * u)
            radius -= step
        return y
    # dominant sector: integrate outward from the series disk
    d0, d1 = _pcf_origin(nu)
    c = _PCF_INNER * u
    y, dy = _weber_taylor(nu, 0j, d0, d1, c)
    radius = _PCF_INNER
    while radius < r:
        step = min(_PCF_STEP, r - radius)
        y, dy = _weber_taylor(nu, radius * u, y, dy, step * u)
        radius += step
    return y


def parabolic_cylinder_d(order: float, w: ArrayLike):
    """Parabolic cylinder function ``D_order(w)`` for complex ``w``.

    Parameters
    ----------
    order : float
        Real order.  ``-3/2`` and ``-5/2`` are the cases exercised by the
        timeline waves; other orders work but are not separately validated.
    w : array_like of complex
        Argument, ``|w| <= 50``.

    Returns
    -------
    complex or ndarray of complex

    Raises
    ------
    AccuracyError
        If ``|w|`` is outside the range where accuracy is certified.

    Notes
    -----
    Three regimes.  For ``|w| <= 4`` the Maclaurin series generated by the
    Weber equation from the exact values ``D(0), D'(0)``.  For ``|w| >= 8``
    the large-argument expansion, with the second exponential included past
    the Stokes lines ``|arg w| = pi/2``.  In between, Taylor steps along the
    ray ``arg w = const``, started on whichever side keeps ``D`` the dominant
    solution of the step direction.
    """
    w = np.asarray(w, dtype=complex)
    out = np.empty(w.shape, dtype=complex)
    for idx, z in np.ndenumerate(w):
        v = _pcfd_scalar(float(order), complex(z))
        if not (math.isfinite(v.real) and math.isfinite(v.imag)):
            raise AccuracyError(f"D_{order}({z}) is not representable")
        out[idx] = v
    return out[()] if out.ndim == 0 else out


def parabolic_cylinder_d_integral(order: float, w: complex, points: int = 400) -> complex:
    """Independent evaluation of ``D_order(w)`` for ``order < 0``.

    Uses ``D_nu(w) = exp(-w^2/4) / Gamma(-nu) * int_0^inf t^(-nu-1) exp(-w t - t^2/2) dt``
    with the substitution ``t = u**2`` and Gauss-Legendre panels on ``u``.
    """
    if not order < 0:
        raise RangeError("integral representation requires a negative order")
    from .oscquad import adaptive_gauss

    w = complex(w)
    upper = max(12.0, 2.0 * abs(w.real) + 12.0)

    def f(u):
        t = u * u
        return 2.0 * u * t ** (-order - 1.0) * np.exp(-w * t - 0.5 * t * t)

    res = adaptive_gauss(f, 0.0, math.sqrt(upper), tol=1e-14, max_panels=points)
    return complex(np.exp(-w * w / 4.0) * res.value / sc.gamma(-order))


# ---------------------------------------------------------------------------
# Spherical harmonics and the Legendre generating kernel
# ---------------------------------------------------------------------------


def _legendre_normalized(lmax: int, m: int, x: np.ndarray):
    """Fully normalized ``sqrt((2l+1)/4pi (l-m)!/(l+m)!) P_l^m(x)`` for ``l = m..lmax``.

    Condon-Shortley phase included.
    """
    s = np.sqrt(np.clip(1.0 - x * x, 0.0, None))
    pmm = np.full(x.shape, math.sqrt(1.0 / (4 * math.pi)))
    for k in range(1, m + 1):
        pmm = -pmm * math.sqrt((2 * k + 1) / (2.0 * k)) * s
    out = {m: pmm}
    if lmax == m:
        return out
    p1 = x * math.sqrt(2 * m + 3) * pmm
    out[m + 1] = p1
    p0 = pmm
    for l in range(m + 2, lmax + 1):
        a = math.sqrt((4 * l * l - 1) / (l * l - m * m))
        b = math.sqrt(((l - 1) ** 2 - m * m) / (4 * (l - 1) ** 2 - 1))
        p0, p1 = p1, a * (x * p1 - b * p0)
        out[l] = p1
    return out


def sph_harm(l: int, m_l: int, direction: ArrayLike):
    """Orthonormal spherical harmonic ``Y_l^{m_l}`` at a unit vector.

    Parameters
    ----------
    l, m_l : int
        Degree and order, ``|m_l| <= l``.
    direction : array_like, shape (..., 3)
        Unit vectors, normalized to within 1e-12.

    Returns
    -------
    complex or ndarray of complex
        Condon-Shortley phase convention, ``Y_l^{-m} = (-1)^m conj(Y_l^m)``.
    """
    l, m_l = int(l), int(m_l)
    if l < 0 or abs(m_l) > l:
        raise RangeError(f"invalid spherical harmonic indices (l={l}, m={m_l})")
    d = np.asarray(direction, dtype=float)
    if d.shape[-1] != 3:
        raise RangeError("direction must have a trailing dimension of 3")
    if np.any(np.abs(np.linalg.norm(d, axis=-1) - 1.0) > 1e-12):
        raise RangeError("direction must be a unit vector")
    x = np.clip(d[..., 2], -1.0, 1.0)
    phi = np.arctan2(d[..., 1], d[..., 0])
    m = abs(m_l)
    p = _legendre_normalized(l, m, x)[l]
    y = p * np.exp(1j * m * phi)
    if m_l < 0:
        y = (-1) ** m * np.conj(y)
    return y[()] if np.ndim(y) == 0 else y


def legendre_sum_kernel(t: ArrayLike, gamma: ArrayLike):
    """Closed form of ``2 pi sum_{l,m} Y_l^m(a) conj(Y_l^m(b)) t**l``.

    Equals ``(1 - t^2) / (2 (1 - 2 t cos(gamma) + t^2)^{3/2})`` where ``gamma``
    is the angle between the two directions.

    Raises
    ------
    RangeError
        If ``|t| > 1 - 1e-9``.
    """
    t = np.asarray(t, dtype=float)
    g = np.asarray(gamma, dtype=float)
    if np.any(np.abs(t) > 1.0 - 1e-9):
        raise RangeError("|t| must not exceed 1 - 1e-9")
    out = (1.0 - t * t) / (2.0 * (1.0 - 2.0 * t * np.cos(g) + t * t) ** 1.5)
    return out[()] if out.ndim == 0 else out
