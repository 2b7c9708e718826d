"""
Verification suites behind ``chronoline verify``.

Each check produces a record ``{check, expected, got, residual, pass}``.
Random points come from a fixed seed so reports are reproducible.
"""

from __future__ import annotations

import math
from typing import Callable, Dict, List

import numpy as np

from . import systems, timeop
from .spectra import (
    PhysicalParams,
    SpectralState,
    hydrogen_spectrum,
    oscillator_spectrum,
    revival_time,
    square_well_spectrum,
)
from .timeline import alias_free_scale, build_time_mesh, phasor_closure_sum

__all__ = ["SUITES", "run_suite", "check_record"]

SEED = 20240611


def _fmt(v):
    if isinstance(v, complex):
        return [v.real, v.imag]
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    return v


def check_record(name: str, expected, got, residual: float, tol: float) -> Dict:
    residual = float(residual)
    return {
        "check": name,
        "expected": _fmt(expected),
        "got": _fmt(got),
        "residual": residual,
        "pass": bool(residual <= tol),
    }


def _max_rel(a, b) -> float:
    a, b = np.asarray(a), np.asarray(b)
    return float(np.max(np.abs(a - b) / np.maximum(np.abs(a), 1e-300)))


def suite_symmetries(tol: float) -> List[Dict]:
    """Time-reversal conjugation identities of every wave family."""
    rng = np.random.default_rng(SEED)
    out = []
    n = 100
    x = rng.uniform(-2, 2, n)
    taus = rng.choice([-1, 1], n) * rng.uniform(0.01, 2, n)
    params = PhysicalParams(mass=1.0, force=0.8)
    ff = lambda x, t: systems.freefall_wave(x, t, params)
    right = lambda x, t: systems.free1d_directional_wave("right", x, t)
    left = lambda x, t: systems.free1d_directional_wave("left", x, t)
    even = lambda x, t: systems.free1d_parity_wave("even", x, t)
    odd = lambda x, t: systems.free1d_parity_wave("odd", x, t)
    radial = lambda x, t: systems.free3d_radial_wave(2, abs(x) + 0.05, t)
    univ = systems.free3d_universal_wave
    # (name, lhs(x, tau), rhs(x, tau)) with rhs = conj of the partner wave
    cases = [
        ("freefall", lambda x, t: ff(x, -t), lambda x, t: np.conj(ff(x, t))),
        ("free1d_right", lambda x, t: right(x, -t), lambda x, t: np.conj(left(x, t))),
        ("free1d_left", lambda x, t: left(x, -t), lambda x, t: np.conj(right(x, t))),
        ("free1d_even", lambda x, t: even(x, -t), lambda x, t: np.conj(even(x, t))),
        ("free1d_odd", lambda x, t: odd(x, -t), lambda x, t: np.conj(odd(x, t))),
        ("free3d_radial_l2", lambda x, t: radial(x, -t), lambda x, t: np.conj(radial(x, t))),
        ("free3d_universal", lambda x, t: univ(x, t), lambda x, t: np.conj(univ(-x, -t))),
    ]
    for name, lhs, rhs in cases:
        a = np.array([lhs(xi, ti) for xi, ti in zip(x, taus)])
        b = np.array([rhs(xi, ti) for xi, ti in zip(x, taus)])
        out.append(check_record(f"conjugation/{name}", 0.0, 0.0, _max_rel(a, b), max(tol, 1e-10)))
    return out


def _closure_cases():
    return {
        "oscillator_N8": oscillator_spectrum(8),
        "square_well_N6": square_well_spectrum(6),
        "hydrogen_N3": hydrogen_spectrum(3),
    }


def suite_closure(tol: float) -> List[Dict]:
    """Phasor closure on the smallest alias-free revival mesh."""
    out = []
    for name, spec in _closure_cases().items():
        rev = revival_time(spec)
        scale = alias_free_scale(rev)
        mesh = build_time_mesh(rev, scale)
        n = len(spec)
        off, diag = 0.0, 0.0
        for j in range(n):
            for k in range(n):
                s = phasor_closure_sum(spec, rev, mesh, j, k)
                if j == k:
                    diag = max(diag, abs(s - mesh.size))
                else:
                    off = max(off, abs(s))
        out.append(check_record(f"closure/{name}/scale{scale}/offdiag", 0.0, off, off, 1e-10 * mesh.size))
        out.append(check_record(f"closure/{name}/scale{scale}/diag", mesh.size, mesh.size, diag, 1e-12 * mesh.size))
    return out


def suite_kernels(tol: float) -> List[Dict]:
    """``I_l`` closed form against quadrature, and kernel spot values."""
    rng = np.random.default_rng(SEED + 1)
    out = []
    ktol = max(tol, 1e-4)
    for l in range(-1, 4):
        worst, worst_res = 0.0, None
        for _ in range(3):
            r1, r2 = rng.uniform(0.4, 2.5, 2)
            if abs(r1 - r2) < 0.2:
                r2 = r1 + 0.4
            res = timeop.pv_integral_Il(l, r1, r2, with_numeric=True, tol=ktol)
            if worst_res is None or res.discrepancy > worst:
                worst, worst_res = res.discrepancy, res
        out.append(check_record(f"kernels/I_{l}", worst_res.closed_form, worst_res.numeric.value, worst, ktol))
    k1 = timeop.kernel_1d_free(1.0, 0.5, 1.0).value
    out.append(check_record("kernels/1d_spot", 0.375j, k1, abs(k1 - 0.375j), 0.0))
    k3 = timeop.kernel_3d_free((1, 0, 0), (0.5, 0, 0), 1.0).value
    out.append(check_record("kernels/3d_spot", 3j / (4 * math.pi), k3, abs(k3 - 3j / (4 * math.pi)), 1e-12))
    worst = 0.0
    for _ in range(5):
        a = rng.normal(size=3)
        b = rng.normal(size=3)
        b *= rng.uniform(0.2, 0.6) * np.linalg.norm(a) / np.linalg.norm(b)
        exact = timeop.kernel_3d_free(a, b).value
        pw = timeop.kernel_3d_partial_wave(a, b, l_max=50).value
        worst = max(worst, abs(pw - exact) / abs(exact))
    out.append(check_record("kernels/3d_partial_wave", 0.0, worst, worst, 1e-8))
    return out


def _gauss3(p):
    return np.pi**-0.75 * np.exp(-0.5 * np.sum(p * p, axis=-1))


def _gauss3_lap(p):
    r2 = np.sum(p * p, axis=-1)
    return (r2 - 3.0) * _gauss3(p)


def suite_commutators(tol: float) -> List[Dict]:
    """Periodic commutator term, free-fall ``[T, H]`` and the 3-D free commutator."""
    out = []
    spec = oscillator_spectrum(2)
    rev = revival_time(spec)
    stationary = SpectralState(np.array([1.0, 0.0]))
    got = timeop.commutator_periodic_term(stationary, rev, 0.3)
    out.append(check_record("commutators/periodic/stationary", 0j, got, abs(got), 1e-12))
    half = SpectralState(np.array([1.0, 1.0]) / math.sqrt(2))
    for tau0, want, label in ((math.pi, 1j, "node"), (0.0, -1j, "antinode")):
        got = timeop.commutator_periodic_term(half, rev, tau0)
        out.append(check_record(f"commutators/periodic/{label}", want, got, abs(got - want), 1e-10))

    params = PhysicalParams(mass=1.0, force=1.3)
    x = np.linspace(-12, 12, 2401)
    h = x[1] - x[0]
    psi = np.pi**-0.25 * np.exp(-0.5 * x * x + 0.7j * x)
    tp = timeop.apply_T_freefall(x, psi, params)
    hp = timeop.apply_H_freefall(x, psi, params)
    th = timeop.apply_T_freefall(x, hp, params)
    ht = timeop.apply_H_freefall(x, tp, params)
    got = complex(np.sum(np.conj(psi) * (th - ht)) * h)
    out.append(check_record("commutators/freefall", 1j, got, abs(got - 1j), 1e-6))

    got = timeop.commutator_3d_check(_gauss3, _gauss3, lap_f=_gauss3_lap, lap_g=_gauss3_lap)
    out.append(check_record("commutators/free3d/gaussian", 1j, got, abs(got - 1j), 5e-3))
    return out


SUITES: Dict[str, Callable[[float], List[Dict]]] = {
    "symmetries": suite_symmetries,
    "closure": suite_closure,
    "kernels": suite_kernels,
    "commutators": suite_commutators,
}


def run_suite(name: str, tol: float = 1e-10) -> List[Dict]:
    """Run one suite, or every suite for ``name="all"``."""
    if name == "all":
        return [rec for key in SUITES for rec in SUITES[key](tol)]
    if name not in SUITES:
        raise KeyError(name)
    return SUITES[name](tol)
