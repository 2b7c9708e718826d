"""
Command-line interface.

::

    chronoline sample --system free1d_right --tau -0.005 --out wave.csv
    chronoline verify all
    chronoline spectrum levels.json

Exit codes: 0 success, 1 failed verification, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence

import numpy as np

from . import checks, systems
from .errors import ChronolineError, IrrationalSpectrumError
from .spectra import DiscreteSpectrum, PhysicalParams, revival_time

__all__ = ["RunConfig", "load_config_file", "cmd_sample", "cmd_verify", "cmd_spectrum", "main"]

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
FLOAT_FMT = "%.11e"


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    """Settings for ``chronoline sample``."""

    system: str = "free1d_right"
    mass: float = 1.0
    force: Optional[float] = None
    tau: List[float] = field(default_factory=lambda: [0.005])
    grid: tuple = (-1.0, 1.0, 801)
    tolerance: float = 1e-10
    output_path: str = "-"
    format: str = "csv"
    l: int = 0
    l_max: Optional[int] = None

    def validate(self) -> None:
        lo, hi, n = self.grid
        if int(n) < 2:
            raise UsageError("grid count must be >= 2")
        if not lo < hi:
            raise UsageError("grid min must be below grid max")
        if not self.tolerance > 0:
            raise UsageError("tolerance must be positive")
        if self.format not in ("csv", "json"):
            raise UsageError("format must be csv or json")
        if self.system not in systems.WAVE_TAGS:
            raise UsageError(f"unknown system {self.system!r}; choose from {', '.join(systems.WAVE_TAGS)}")
        if not self.mass > 0:
            raise UsageError("mass must be positive")
        if self.system == "freefall" and not self.force:
            raise UsageError("freefall needs a non-zero --force")
        if not self.tau:
            raise UsageError("at least one tau is required")

    @property
    def coordinates(self) -> np.ndarray:
        lo, hi, n = self.grid
        return np.linspace(float(lo), float(hi), int(n))


def _parse_taus(text) -> List[float]:
    if isinstance(text, (list, tuple)):
        return [float(t) for t in text]
    return [float(t) for t in str(text).replace(";", ",").split(",") if t.strip()]


def load_config_file(path: str) -> dict:
    """Read flat ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    try:
        with open(path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise UsageError(f"{path}:{lineno}: expected key=value")
                key, value = (s.strip() for s in line.split("=", 1))
                out[key.replace("-", "_")] = value
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    return out


_KEYS = {
    "system": str,
    "tau": _parse_taus,
    "grid_min": float,
    "grid_max": float,
    "grid_count": int,
    "mass": float,
    "force": float,
    "tol": float,
    "out": str,
    "format": str,
    "l": int,
    "l_max": int,
}


def build_config(args: argparse.Namespace) -> RunConfig:
    """Merge defaults, the config file and flags (flags win)."""
    merged = {}
    if getattr(args, "config", None):
        for key, value in load_config_file(args.config).items():
            if key not in _KEYS:
                raise UsageError(f"unknown config key {key!r}")
            try:
                merged[key] = _KEYS[key](value)
            except ValueError as exc:
                raise UsageError(f"bad value for {key}: {value!r}") from exc
    for key in _KEYS:
        value = getattr(args, key, None)
        if value is not None:
            merged[key] = value
    base = RunConfig()
    lo, hi, n = base.grid
    cfg = RunConfig(
        system=merged.get("system", base.system),
        mass=merged.get("mass", base.mass),
        force=merged.get("force", base.force),
        tau=merged.get("tau", base.tau),
        grid=(merged.get("grid_min", lo), merged.get("grid_max", hi), merged.get("grid_count", n)),
        tolerance=merged.get("tol", base.tolerance),
        output_path=merged.get("out", base.output_path),
        format=merged.get("format", base.format),
        l=merged.get("l", base.l),
        l_max=merged.get("l_max", base.l_max),
    )
    cfg.validate()
    return cfg


def _thread_count() -> int:
    env = os.environ.get("CHRONOLINE_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError as exc:
            raise UsageError("CHRONOLINE_THREADS must be an integer") from exc
        if n < 1:
            raise UsageError("CHRONOLINE_THREADS must be >= 1")
        return n
    return os.cpu_count() or 1


def _evaluate(cfg: RunConfig, tau: float, coords: np.ndarray) -> np.ndarray:
    params = PhysicalParams(mass=cfg.mass, force=cfg.force)
    kind = systems.WaveKind(cfg.system, cfg.l)
    if cfg.system == "free3d_universal" and cfg.l_max is not None:
        k_hat = np.array([0.0, 0.0, 1.0])
        return np.array(
            [systems.universal_from_partial_waves(k_hat, c * k_hat, tau, cfg.mass, cfg.l_max) for c in coords]
        )
    return np.asarray(systems.evaluate_wave(kind, coords, tau, params), dtype=complex)


def sample_rows(cfg: RunConfig):
    """Evaluate the configured wave; rows ordered by ``(tau, grid index)``."""
    coords = cfg.coordinates
    n_thr = _thread_count()
    chunks = np.array_split(np.arange(coords.size), min(n_thr, coords.size))
    rows = []
    for tau in cfg.tau:
        if n_thr > 1:
            with ThreadPoolExecutor(n_thr) as ex:
                parts = list(ex.map(lambda idx: _evaluate(cfg, tau, coords[idx]), chunks))
        else:
            parts = [_evaluate(cfg, tau, coords[idx]) for idx in chunks]
        values = np.concatenate(parts)
        phase = np.angle(values)
        phase = np.where(phase <= -math.pi, math.pi, phase)
        for c, v, p in zip(coords, values, phase):
            rows.append((tau, c, v.real, v.imag, abs(v), p))
    return rows


def format_rows(rows, multi_tau: bool, fmt: str) -> str:
    cols = (["tau"] if multi_tau else []) + ["coordinate", "re", "im", "modulus", "phase"]
    if fmt == "csv":
        lines = [",".join(cols)]
        for row in rows:
            vals = row if multi_tau else row[1:]
            lines.append(",".join(FLOAT_FMT % v for v in vals))
        return "\n".join(lines) + "\n"
    records = []
    for row in rows:
        vals = row if multi_tau else row[1:]
        records.append({c: float(FLOAT_FMT % v) for c, v in zip(cols, vals)})
    return json.dumps({"columns": cols, "rows": records}, indent=1) + "\n"


def _write(text: str, path: str) -> None:
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def cmd_sample(cfg: RunConfig) -> int:
    """Sample a timeline wave on a grid and write CSV or JSON."""
    rows = sample_rows(cfg)
    _write(format_rows(rows, len(cfg.tau) > 1, cfg.format), cfg.output_path)
    return EXIT_OK


def cmd_verify(suite: str, tolerance: float = 1e-10, out: str = "-") -> int:
    """Run a verification suite and write its JSON report."""
    report = checks.run_suite(suite, tolerance)
    failed = [r for r in report if not r["pass"]]
    doc = {"suite": suite, "passed": not failed, "checks": report}
    _write(json.dumps(doc, indent=1) + "\n", out)
    if failed:
        print(f"verification failed: {failed[0]['check']} (residual {failed[0]['residual']:.3e})", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def _level(v):
    if isinstance(v, str):
        return Fraction(v.strip())
    if isinstance(v, int):
        return Fraction(v)
    return float(v)


def read_spectrum(path: str) -> DiscreteSpectrum:
    """Spectrum file: a JSON list of levels or ``{"levels": [...], "labels": [...]}``.

    Levels may be numbers or exact strings such as ``"-1/4"``.
    """
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read spectrum {path}: {exc}") from exc
    if isinstance(doc, dict):
        levels, labels = doc.get("levels"), doc.get("labels")
    else:
        levels, labels = doc, None
    if not isinstance(levels, list):
        raise UsageError("spectrum file needs a list of levels")
    try:
        return DiscreteSpectrum([_level(v) for v in levels], labels)
    except (ValueError, ZeroDivisionError, ChronolineError) as exc:
        raise UsageError(f"invalid spectrum: {exc}") from exc


def format_revival(rev, spectrum: DiscreteSpectrum) -> str:
    lines = [
        f"tau_rev      {rev.tau_rev:.12g}  ({rev.tau_rev / math.pi:.12g} pi)",
        f"theta        {rev.theta:.12g}",
        f"dE_min       {rev.delta_e_min:.12g}",
        f"product_tau  {rev.product_tau:.12g}",
        f"exact        {rev.exact}",
        "gap denominators  " + " ".join(str(q) for q in rev.gap_denominators),
        "",
        f"{'j':>3}  {'label':>8}  {'E_j':>16}  {'n_j':>8}  {'residual':>10}",
    ]
    labels = spectrum.labels or [str(j) for j in range(len(spectrum))]
    for j, (e, nj, res) in enumerate(zip(spectrum.energies, rev.n_j, rev.residuals)):
        lines.append(f"{j:>3}  {labels[j]:>8}  {e:>16.10g}  {nj:>8d}  {res:>10.2e}")
    return "\n".join(lines) + "\n"


def cmd_spectrum(path: str, max_denominator: int = 1_000_000, out: str = "-") -> int:
    """Revival analysis of a spectrum file."""
    spec = read_spectrum(path)
    try:
        rev = revival_time(spec, max_denominator=max_denominator)
    except IrrationalSpectrumError as exc:
        print(f"warning: {exc}; best effort follows", file=sys.stderr)
        if exc.best_effort is not None:
            _write(format_revival(exc.best_effort, spec), out)
        return EXIT_FAIL
    _write(format_revival(rev, spec), out)
    return EXIT_OK


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="chronoline", description="Timeline waves, time operators and checks.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("sample", help="sample a timeline wave on a grid")
    s.add_argument("--config", help="flat key=value file; flags override it")
    s.add_argument("--system", choices=systems.WAVE_TAGS)
    s.add_argument("--tau", type=_parse_taus, help="one value or a comma-separated list")
    s.add_argument("--grid-min", dest="grid_min", type=float)
    s.add_argument("--grid-max", dest="grid_max", type=float)
    s.add_argument("--grid-count", dest="grid_count", type=int)
    s.add_argument("--mass", type=float)
    s.add_argument("--force", type=float)
    s.add_argument("--tol", type=float)
    s.add_argument("--out")
    s.add_argument("--format", choices=("csv", "json"))
    s.add_argument("--l", type=int, help="orbital number for free3d_radial")
    s.add_argument("--l-max", dest="l_max", type=int, help="partial-wave cut-off for free3d_universal")

    v = sub.add_parser("verify", help="run verification suites")
    v.add_argument("suite", choices=sorted(checks.SUITES) + ["all"])
    v.add_argument("--tol", type=float, default=1e-10)
    v.add_argument("--out", default="-")

    r = sub.add_parser("spectrum", help="revival analysis of a spectrum file")
    r.add_argument("input")
    r.add_argument("--max-denominator", dest="max_denominator", type=int, default=1_000_000)
    r.add_argument("--out", default="-")
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        if args.command == "sample":
            return cmd_sample(build_config(args))
        if args.command == "verify":
            if not args.tol > 0:
                raise UsageError("tolerance must be positive")
            return cmd_verify(args.suite, args.tol, args.out)
        return cmd_spectrum(args.input, args.max_denominator, args.out)
    except UsageError as exc:
        print(f"chronoline: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ChronolineError, ValueError) as exc:
        print(f"chronoline: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
