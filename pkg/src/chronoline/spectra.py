"""
Spectral models: discrete levels with revival analysis, continuum bands and
energy-normalized amplitudes.

Units are natural (hbar = 1).  Energies may be given as floats, integers,
:class:`fractions.Fraction` or strings such as ``"-1/9"``; exact inputs are
kept exactly so that revival times of rational spectra come out exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .errors import IrrationalSpectrumError, RangeError

__all__ = [
    "DiscreteSpectrum",
    "RevivalData",
    "ContinuumBand",
    "SpectralState",
    "PhysicalParams",
    "revival_time",
    "energy_norm_constant",
    "truncate_accessible",
    "oscillator_spectrum",
    "square_well_spectrum",
    "hydrogen_spectrum",
]

Level = Union[float, int, Fraction, str]


def _exact(v) -> Optional[Fraction]:
    if isinstance(v, (int, Fraction)) and not isinstance(v, bool):
        return Fraction(v)
    if isinstance(v, str):
        try:
            return Fraction(v.strip())
        except ValueError:
            return None
    return None


@dataclass(frozen=True)
class DiscreteSpectrum:
    """Strictly increasing, non-degenerate energy levels.

    Parameters
    ----------
    levels : sequence
        Energies ``E_j``.
    labels : sequence of str, optional
        Degeneracy or bookkeeping label per level.
    """

    levels: tuple
    labels: Optional[tuple] = None
    exact: Optional[tuple] = field(default=None, repr=False)

    def __init__(self, levels: Sequence[Level], labels: Optional[Sequence[str]] = None):
        exact = [_exact(v) for v in levels]
        values = tuple(float(e) if e is not None else float(v) for e, v in zip(exact, levels))
        if len(values) < 1:
            raise RangeError("a spectrum needs at least one level")
        if any(not math.isfinite(v) for v in values):
            raise RangeError("levels must be finite")
        if any(b <= a for a, b in zip(values[:-1], values[1:])):
            raise RangeError("levels must be strictly increasing")
        if labels is not None and len(labels) != len(values):
            raise RangeError("labels must match levels one to one")
        object.__setattr__(self, "levels", values)
        object.__setattr__(self, "labels", tuple(labels) if labels is not None else None)
        object.__setattr__(self, "exact", tuple(exact) if all(e is not None for e in exact) else None)

    def __len__(self) -> int:
        return len(self.levels)

    @property
    def energies(self) -> np.ndarray:
        return np.asarray(self.levels)


@dataclass(frozen=True)
class RevivalData:
    """Revival period and the integers that certify it.

    ``levels[j] * tau_rev = 2 pi n_j + theta`` holds for every level to within
    the residuals listed.
    """

    tau_rev: float
    theta: float
    n_j: tuple
    gap_denominators: tuple
    delta_e_min: float
    residuals: tuple
    product_tau: float
    exact: bool = False
    levels: tuple = ()

    @property
    def energies(self) -> np.ndarray:
        """Levels this revival was computed for."""
        return np.asarray(self.levels, dtype=float)

    @property
    def max_residual(self) -> float:
        return max(self.residuals) if self.residuals else 0.0


@dataclass(frozen=True)
class ContinuumBand:
    """Energy interval ``[e_min, e_max]`` of a continuum.

    ``level_spacing`` marks a quasi-continuum standing in for closely spaced
    levels ``dE = 2 pi / tau_rev``; its presence enables the system-time
    guard of :func:`chronoline.timeline.timeline_transform`.
    """

    e_min: float = 0.0
    e_max: float = math.inf
    level_spacing: Optional[float] = None

    def __post_init__(self):
        if not self.e_min < self.e_max:
            raise RangeError("e_min must be below e_max")
        if math.isnan(self.e_min) or math.isnan(self.e_max):
            raise RangeError("band edges must not be NaN")
        if self.level_spacing is not None and not self.level_spacing > 0:
            raise RangeError("level_spacing must be positive")

    @property
    def tau_rev(self) -> Optional[float]:
        """Recurrence time of the underlying quasi-continuum, if any."""
        return None if self.level_spacing is None else 2 * math.pi / self.level_spacing


@dataclass(frozen=True)
class SpectralState:
    """Energy representation of a state.

    Parameters
    ----------
    discrete_amplitudes : array_like of complex
        ``<E_j|psi>``, one per level of the associated spectrum.
    continuum_amplitude : callable, optional
        Energy-normalized ``<E|psi>`` on the band; vectorized in ``E``.
    """

    discrete_amplitudes: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=complex))
    continuum_amplitude: Optional[Callable] = None

    def __post_init__(self):
        amps = np.array(self.discrete_amplitudes, dtype=complex).reshape(-1)
        if np.any(~np.isfinite(amps)):
            raise RangeError("discrete amplitudes must be finite")
        amps.setflags(write=False)
        object.__setattr__(self, "discrete_amplitudes", amps)

    @property
    def has_continuum(self) -> bool:
        return self.continuum_amplitude is not None

    def discrete_norm_squared(self) -> float:
        return float(np.sum(np.abs(self.discrete_amplitudes) ** 2))

    def phase_shifted(self, spectrum, s: float) -> "SpectralState":
        """Multiply every amplitude by ``exp(i s E)``.

        ``s = -t`` evolves the state by laboratory time ``t``; ``s = tau0``
        moves the origin of system time.  ``spectrum`` is anything with a
        ``levels`` sequence (a spectrum or its revival data).
        """
        amps = self.discrete_amplitudes
        if amps.size:
            if spectrum is None or len(spectrum.levels) != amps.size:
                raise RangeError("a matching spectrum is needed for discrete amplitudes")
            amps = amps * np.exp(1j * s * np.asarray(spectrum.levels, dtype=float))
        cont = self.continuum_amplitude
        if cont is not None:
            base = cont

            def cont(e, base=base):
                return np.exp(1j * s * np.asarray(e)) * base(e)

        return SpectralState(amps, cont)

    def evolved(self, spectrum, t: float) -> "SpectralState":
        """Schrodinger evolution by laboratory time ``t``."""
        return self.phase_shifted(spectrum, -t)


@dataclass(frozen=True)
class PhysicalParams:
    """Mass and (for free fall) force, in units with hbar = 1."""

    mass: float = 1.0
    force: Optional[float] = None

    def __post_init__(self):
        if not (self.mass > 0 and math.isfinite(self.mass)):
            raise RangeError("mass must be positive and finite")
        if self.force is not None and (self.force == 0 or not math.isfinite(self.force)):
            raise RangeError("force must be finite and non-zero")

    @property
    def kappa(self) -> float:
        """``(2 m |F|)^{1/3}``."""
        if self.force is None:
            raise RangeError("kappa needs a force")
        return (2.0 * self.mass * abs(self.force)) ** (1.0 / 3.0)


# ---------------------------------------------------------------------------
# Revival analysis
# ---------------------------------------------------------------------------


def _rationalize(x, max_denominator: int, tol: float):
    if isinstance(x, Fraction):
        return x, 0.0
    fr = Fraction(x).limit_denominator(max_denominator)
    return fr, abs(float(fr) - x)


def _fraction_gcd(values):
    num = reduce(math.gcd, (v.numerator for v in values))
    den = reduce(lambda a, b: a * b // math.gcd(a, b), (v.denominator for v in values))
    return Fraction(num, den)


def _phase_fit(levels: np.ndarray, tau: float):
    """Common phase offset ``theta`` and integers ``n_j`` for a candidate period."""
    ph = np.mod(levels * tau, 2 * math.pi)
    theta = math.atan2(np.mean(np.sin(ph)), np.mean(np.cos(ph))) % (2 * math.pi)
    n = np.rint((levels * tau - theta) / (2 * math.pi)).astype(np.int64)
    # least-squares refinement of theta once the integers are fixed
    theta = float(np.mean(levels * tau - 2 * math.pi * n)) % (2 * math.pi)
    n = np.rint((levels * tau - theta) / (2 * math.pi)).astype(np.int64)
    res = np.abs(levels * tau - 2 * math.pi * n - theta)
    res = np.minimum(res, np.abs(res - 2 * math.pi))
    return theta, n, res


def revival_time(spectrum: DiscreteSpectrum, max_denominator: int = 1_000_000, tol: float = 1e-9) -> RevivalData:
    """Smallest verified revival period of a commensurate spectrum.

    Parameters
    ----------
    spectrum : DiscreteSpectrum
        At least two levels.
    max_denominator : int
        Largest denominator accepted when rationalizing gap ratios.
    tol : float
        Tolerance on the ratio approximations and on the phase residuals
        ``|E_j tau_rev - 2 pi n_j - theta|``.

    Returns
    -------
    RevivalData

    Raises
    ------
    IrrationalSpectrumError
        When a gap ratio has no rational approximation within ``tol`` using
        denominators up to ``max_denominator``.  The exception carries a
        best-effort :class:`RevivalData`.

    Notes
    -----
    Consecutive gaps are divided by the smallest gap and rationalized by
    continued fractions, giving denominators ``q_j``.  The product period
    ``2 pi prod(q_j) / dE_min`` is then reduced to ``2 pi / (dE_min g)``
    with ``g`` the exact greatest common divisor of the rational ratios,
    which is the shortest period compatible with them.
    """
    n = len(spectrum)
    if n < 2:
        raise RangeError("revival analysis needs at least two levels")
    exact = spectrum.exact
    if exact is not None:
        gaps = [b - a for a, b in zip(exact[:-1], exact[1:])]
    else:
        e = spectrum.levels
        gaps = [b - a for a, b in zip(e[:-1], e[1:])]
    d_min = min(gaps)
    ratios, q, worst = [], [], 0.0
    for g in gaps:
        fr, err = _rationalize(g / d_min, max_denominator, tol)
        ratios.append(fr)
        q.append(fr.denominator)
        worst = max(worst, err)
    d_min_f = float(d_min)
    product_tau = 2 * math.pi * math.prod(q) / d_min_f
    g = _fraction_gcd(ratios)
    tau = float(2 * math.pi / (Fraction(d_min) * g)) if exact is not None else 2 * math.pi / (d_min_f * float(g))
    levels = spectrum.energies
    theta, nj, res = _phase_fit(levels, tau)
    # integer-relation check: accept any further integer division that still verifies
    tau0 = tau
    for k in range(2, 65):
        th_k, n_k, res_k = _phase_fit(levels, tau0 / k)
        if np.max(res_k) < tol:
            tau, theta, nj, res = tau0 / k, th_k, n_k, res_k
    data = RevivalData(
        tau_rev=tau,
        theta=theta,
        n_j=tuple(int(v) for v in nj),
        gap_denominators=tuple(q),
        delta_e_min=d_min_f,
        residuals=tuple(float(r) for r in res),
        product_tau=product_tau,
        exact=exact is not None,
        levels=spectrum.levels,
    )
    if worst > tol or np.max(res) > max(tol, 1e-12 * tau * np.max(np.abs(levels))):
        raise IrrationalSpectrumError(
            f"gap ratios not rational within tol={tol:g} at max_denominator={max_denominator}", data
        )
    return data


def truncate_accessible(spectrum: DiscreteSpectrum, n_keep: int) -> DiscreteSpectrum:
    """Keep the first ``n_keep`` levels (the accessible-states truncation)."""
    if not 1 <= n_keep <= len(spectrum):
        raise RangeError(f"n_keep must be in [1, {len(spectrum)}]")
    src = spectrum.exact if spectrum.exact is not None else spectrum.levels
    labels = spectrum.labels[:n_keep] if spectrum.labels is not None else None
    return DiscreteSpectrum(src[:n_keep], labels)


# ---------------------------------------------------------------------------
# Energy normalization
# ---------------------------------------------------------------------------

_SYSTEMS = ("freefall", "free1d", "free3d_sph", "free3d_uni")


def energy_norm_constant(system: str, params: PhysicalParams, k_or_E: float = 1.0) -> float:
    """Normalization making the stationary waves energy-normalized.

    Parameters
    ----------
    system : {"freefall", "free1d", "free3d_sph", "free3d_uni"}
    params : PhysicalParams
    k_or_E : float
        Wave number for the free systems (ignored for free fall).

    Returns
    -------
    float
        ``sqrt(kappa^2/|F|)``, ``sqrt(m / (2 pi |k|))``, ``sqrt(2 m k / pi)``
        or ``sqrt(2 m k / pi) / (4 pi)``.
    """
    m = params.mass
    if system == "freefall":
        if params.force is None:
            raise RangeError("free fall needs a force")
        return math.sqrt(params.kappa**2 / abs(params.force))
    if system not in _SYSTEMS:
        raise RangeError(f"unknown system {system!r}")
    k = float(k_or_E)
    if system == "free1d":
        if k == 0:
            raise RangeError("free1d normalization diverges at k = 0")
        return math.sqrt(m / (2 * math.pi * abs(k)))
    if not k > 0:
        raise RangeError("wave number must be positive")
    c = math.sqrt(2 * m * k / math.pi)
    return c if system == "free3d_sph" else c / (4 * math.pi)


# ---------------------------------------------------------------------------
# Model spectra
# ---------------------------------------------------------------------------


def oscillator_spectrum(n: int, spacing: Level = 1, offset: Level = 0) -> DiscreteSpectrum:
    """Uniform ladder ``offset + spacing * j`` for ``j = 0..n-1``."""
    sp, off = _exact(spacing), _exact(offset)
    if sp is not None and off is not None:
        return DiscreteSpectrum([off + sp * j for j in range(n)])
    return DiscreteSpectrum([float(offset) + float(spacing) * j for j in range(n)])


def square_well_spectrum(n: int, e1: Level = 1) -> DiscreteSpectrum:
    """Infinite square well, ``E_j = j^2 E_1`` for ``j = 1..n``."""
    e = _exact(e1)
    if e is not None:
        return DiscreteSpectrum([e * j * j for j in range(1, n + 1)])
    return DiscreteSpectrum([float(e1) * j * j for j in range(1, n + 1)])


def hydrogen_spectrum(n: int, rydberg: Level = 1) -> DiscreteSpectrum:
    """Bound hydrogen-like levels ``-R / j^2`` for ``j = 1..n``."""
    r = _exact(rydberg)
    if r is not None:
        return DiscreteSpectrum([-r / (j * j) for j in range(1, n + 1)])
    return DiscreteSpectrum([-float(rydberg) / (j * j) for j in range(1, n + 1)])
