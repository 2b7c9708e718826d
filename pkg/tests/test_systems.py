import json
import math
from pathlib import Path

import mpmath as mp
import numpy as np
import pytest

from chronoline.errors import RangeError, SingularTimeError
from chronoline.spectra import PhysicalParams
from chronoline.systems import (
    WaveKind,
    evaluate_wave,
    free1d_directional_integral,
    free1d_directional_wave,
    free1d_parity_integral,
    free1d_parity_wave,
    free3d_radial_integral,
    free3d_radial_wave,
    free3d_universal_integral,
    free3d_universal_wave,
    freefall_integral,
    freefall_wave,
    transition_width,
    universal_coordinate,
    universal_from_partial_waves,
)
from chronoline.timeline import subspace_rotation

GOLDEN = Path(__file__).parent / "golden" / "oracle_waves.json"


def rel(a, b):
    return abs(complex(a) - complex(b)) / max(abs(complex(b)), 1e-300)


def _closed(rec):
    tag, c, t, m = rec["system"], rec["coord"], rec["tau"], rec["mass"]
    if tag.startswith("free1d_") and tag[7:] in ("right", "left"):
        return free1d_directional_wave(tag[7:], c, t, m)
    if tag.startswith("free1d_"):
        return free1d_parity_wave(tag[7:], c, t, m)
    if tag == "free3d_radial":
        return free3d_radial_wave(rec["l"], c, t, m)
    return free3d_universal_wave(c, t, m)


@pytest.mark.parametrize("rec", json.loads(GOLDEN.read_text()), ids=lambda r: f"{r['system']}-{r['coord']}-{r['tau']}")
def test_against_frozen_oracle(rec):
    want = complex(float(rec["re"]), float(rec["im"]))
    assert rel(_closed(rec), want) < 1e-9


@pytest.mark.parametrize(
    "x,tau,m", [(0.37, 0.5, 1.0), (-1.2, -0.3, 1.0), (2.0, 1.5, 2.0), (0.0, -0.05, 0.5)]
)
def test_directional_integral(x, tau, m):
    for d in ("right", "left"):
        assert rel(free1d_directional_wave(d, x, tau, m), free1d_directional_integral(d, x, tau, m).value) < 1e-9


@pytest.mark.parametrize("x,tau", [(1.0, 0.5), (-0.7, -1.1), (0.0, 0.3), (2.5, 0.05)])
def test_parity_integral(x, tau):
    for p in ("even", "odd"):
        got = free1d_parity_wave(p, x, tau)
        want = free1d_parity_integral(p, x, tau).value
        assert abs(got - want) <= 1e-9 * max(1.0, abs(want))


@pytest.mark.parametrize("l,r,tau", [(0, 0.5, 0.7), (1, 1.0, 0.7), (2, 1.7, -0.4), (4, 0.3, 2.0)])
def test_radial_integral(l, r, tau):
    assert rel(free3d_radial_wave(l, r, tau), free3d_radial_integral(l, r, tau).value) < 1e-8


@pytest.mark.parametrize("xi,tau", [(0.0, 0.005), (0.4, -0.2), (-1.3, 0.9)])
def test_universal_integral(xi, tau):
    assert rel(free3d_universal_wave(xi, tau), free3d_universal_integral(xi, tau).value) < 1e-8


@pytest.mark.parametrize("force", [1.0, -0.6, 3.0])
def test_freefall_integral(force):
    p = PhysicalParams(1.3, force)
    for x, tau in ((0.4, 0.8), (-1.0, -1.7), (2.0, 0.1)):
        assert rel(freefall_wave(x, tau, p), freefall_integral(x, tau, p).value) < 1e-9


def test_spot_values():
    want = complex(mp.pcfd(-1.5, 0)) * np.exp(-3j * math.pi / 8) / (4 * math.sqrt(math.pi))
    assert rel(free1d_directional_wave("right", 0.0, 1.0), want) < 1e-13
    assert freefall_wave(0.0, 0.0, PhysicalParams(1.0, 1.0)) == pytest.approx(1 / math.sqrt(2 * math.pi))
    assert free1d_parity_wave("odd", 0.0, 0.4) == 0


def test_reflection_and_conjugation():
    rng = np.random.default_rng(7)
    x = rng.uniform(-3, 3, 50)
    t = rng.choice([-1, 1], 50) * rng.uniform(0.05, 2, 50)
    l = free1d_directional_wave("left", x, t)
    assert np.allclose(free1d_directional_wave("right", -x, t), l, rtol=1e-12, atol=0)
    assert np.allclose(free1d_directional_wave("right", x, -t), np.conj(l), rtol=1e-12, atol=0)
    assert np.allclose(free3d_universal_wave(x, t), np.conj(free3d_universal_wave(-x, -t)), rtol=1e-12, atol=0)
    for p in ("even", "odd"):
        assert np.allclose(free1d_parity_wave(p, x, -t), np.conj(free1d_parity_wave(p, x, t)), rtol=1e-12, atol=1e-300)
    assert np.allclose(free3d_radial_wave(2, np.abs(x) + 0.1, -t), np.conj(free3d_radial_wave(2, np.abs(x) + 0.1, t)))


def test_parity_to_direction_map():
    x = np.linspace(-2, 2, 41)
    tau = 0.3
    even = free1d_parity_wave("even", x, tau)
    odd = free1d_parity_wave("odd", x, tau)
    u = np.array([[1, 1j], [1, -1j]]) / math.sqrt(2)
    right, left = subspace_rotation([even, odd], u)
    assert np.max(np.abs(right - free1d_directional_wave("right", x, tau))) < 1e-9
    assert np.max(np.abs(left - free1d_directional_wave("left", x, tau))) < 1e-9


@pytest.mark.parametrize(
    "fn,sign,want",
    [
        (lambda x: free1d_directional_wave("right", x, 0.5), 1, 0.5),
        (lambda x: free1d_directional_wave("right", x, 0.5), -1, -1.5),
        (lambda x: free3d_universal_wave(x, 0.5), 1, 1.5),
        (lambda x: free3d_universal_wave(x, 0.5), -1, -2.5),
    ],
)
def test_asymptotic_slopes(fn, sign, want):
    x = sign * np.geomspace(10, 35, 30)
    slope = np.polyfit(np.log(np.abs(x)), np.log(np.abs(fn(x))), 1)[0]
    assert abs(slope - want) < 0.05


@pytest.mark.parametrize("l", [0, 1, 2, 3])
def test_small_r_slope(l):
    r = np.geomspace(1e-3, 1e-2, 10)
    slope = np.polyfit(np.log(r), np.log(np.abs(free3d_radial_wave(l, r, 0.5))), 1)[0]
    assert abs(slope - l) < 1e-3


def test_partial_wave_ladder():
    k = np.array([0.0, 0.6, 0.8])
    rv = np.array([0.5, -0.3, 0.9])
    tau = 0.7
    exact = free3d_universal_wave(universal_coordinate(k, rv), tau)
    devs = [abs(universal_from_partial_waves(k, rv, tau, l_max=n) - exact) for n in (4, 8, 16)]
    assert devs[0] > devs[1] > devs[2]
    assert devs[2] < 1e-10


def test_universal_depends_on_xi_only():
    k = np.array([0.0, 0.0, 1.0])
    a = universal_from_partial_waves(k, [0.3, 0.0, 0.5], 0.6, l_max=30)
    b = universal_from_partial_waves(k, [0.0, 0.3, 0.5], 0.6, l_max=30)
    assert abs(a - b) < 1e-12


def test_transition_width_narrows():
    widths = [transition_width(t) for t in (0.16, 0.04, 0.01)]
    assert widths[0] > widths[1] > widths[2]
    assert widths[0] / widths[1] == pytest.approx(2.0, rel=1e-2)


def test_errors():
    with pytest.raises(SingularTimeError):
        free1d_directional_wave("right", 0.2, 0.0)
    with pytest.raises(SingularTimeError):
        free3d_universal_wave(0.2, np.array([0.1, 0.0]))
    with pytest.raises(RangeError):
        WaveKind("bogus")
    with pytest.raises(RangeError):
        universal_coordinate([1.0, 1.0, 0.0], [0, 0, 1])


def test_evaluate_wave_dispatch():
    p = PhysicalParams(1.0, 2.0)
    assert evaluate_wave(WaveKind("free3d_radial", 2), 0.8, 0.4, p) == free3d_radial_wave(2, 0.8, 0.4)
    assert evaluate_wave(WaveKind("freefall"), 0.1, 0.0, p) == freefall_wave(0.1, 0.0, p)
