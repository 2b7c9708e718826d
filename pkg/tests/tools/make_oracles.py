"""Regenerate tests/golden/oracle_waves.json with mpmath.

The wave-number integrals are evaluated at 40 digits along the ray
k = k_s + rho exp(-i pi/4 sgn tau), independently of the package.
Run from the repository root:  python3 tests/tools/make_oracles.py
"""

import json
from pathlib import Path

import mpmath as mp

mp.mp.dps = 40
OUT = Path(__file__).resolve().parents[1] / "golden" / "oracle_waves.json"


def descent(amp, s, x, tau, m):
    x, tau, m = mp.mpf(x), mp.mpf(tau), mp.mpf(m)
    d = mp.expjpi(-mp.mpf(1) / 4 * mp.sign(tau))
    ks = s * m * x / tau

    def f(k):
        return amp(k) * mp.exp(1j * s * k * x - 0.5j * k * k * tau / m)

    total = 0
    start = 0
    if ks > 0:
        total += mp.quad(f, [0, ks])
        start = ks
    width = mp.sqrt(2 * m / abs(tau))
    total += d * mp.quad(lambda r: f(start + r * d), [0, width, 4 * width, 16 * width, mp.inf])
    return total


def directional(direction, x, tau, m):
    s = 1 if direction == "right" else -1
    return descent(mp.sqrt, s, x, tau, m) / (2 * mp.pi * mp.sqrt(m))


def universal(xi, tau, m):
    return descent(lambda k: k ** mp.mpf(1.5), 1, xi, tau, m) / (4 * mp.pi**2 * mp.sqrt(m))


def radial(l, r, tau, m):
    r = mp.mpf(r)
    nu = l + mp.mpf(1) / 2
    val = descent(lambda k: k * mp.besselj(nu, k * r), 1, 0, tau, m)
    return val / mp.sqrt(2 * mp.pi * m * r)


def parity(p, x, tau, m):
    ax = abs(mp.mpf(x))
    nu = -mp.mpf(1) / 2 if p == "even" else mp.mpf(1) / 2
    val = descent(lambda k: k * mp.besselj(nu, k * ax), 1, 0, tau, m)
    val *= mp.sqrt(ax) / (2 * mp.sqrt(mp.pi * m))
    return -val if (p == "odd" and x < 0) else val


CASES = [
    ("free1d_right", None, 0.37, 0.5, 1.0),
    ("free1d_right", None, -0.8, 0.25, 1.0),
    ("free1d_right", None, 0.6, -0.005, 1.0),
    ("free1d_left", None, 1.3, 0.7, 2.0),
    ("free1d_left", None, -0.2, -1.1, 0.5),
    ("free3d_universal", None, 0.45, 0.3, 1.0),
    ("free3d_universal", None, -0.9, -0.6, 1.0),
    ("free3d_universal", None, 0.25, 0.005, 1.0),
    ("free1d_even", None, 0.7, 0.4, 1.0),
    ("free1d_even", None, -1.2, -0.9, 1.5),
    ("free1d_odd", None, 0.55, 0.35, 1.0),
    ("free1d_odd", None, -0.9, 1.2, 1.0),
    ("free3d_radial", 0, 0.8, 0.5, 1.0),
    ("free3d_radial", 1, 1.1, -0.4, 1.0),
    ("free3d_radial", 3, 0.6, 0.2, 2.0),
]


def main():
    rows = []
    for tag, l, x, tau, m in CASES:
        if tag.startswith("free1d_r") or tag.startswith("free1d_l"):
            v = directional(tag[7:], x, tau, m)
        elif tag == "free3d_universal":
            v = universal(x, tau, m)
        elif tag == "free3d_radial":
            v = radial(l, x, tau, m)
        else:
            v = parity(tag[7:], x, tau, m)
        rows.append({"system": tag, "l": l, "coord": x, "tau": tau, "mass": m,
                     "re": mp.nstr(v.real, 20), "im": mp.nstr(v.imag, 20)})
        print(tag, l, x, tau, m, mp.nstr(v, 15))
    OUT.write_text(json.dumps(rows, indent=1) + "\n")


if __name__ == "__main__":
    main()
