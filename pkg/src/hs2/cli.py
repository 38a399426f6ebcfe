"""Command-line front end: ``hs2 simulate | curvature | blowup | jacobi | verify``.

Every command reads an optional JSON config (``--config``); flags override
its fields. Outputs are a CSV series and/or a JSON summary whose ``config``
key can be fed back through ``--config`` to reproduce the run.

Exit codes: 0 ok, 1 verification failure, 2 config error, 3 runtime error.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from hs2.christoffel import EquationKind, MetricConvention, metric, norm
from hs2.curvature import random_tangent, sectional_curvature
from hs2.dynamics import (BLOWUP_SLOPE, DEFAULT_DT, EulerianState, GeodesicState,
                          JacobiState, adaptive_dt, detect_blowup, eulerian_step,
                          geodesic_energy, geodesic_step, hs_blowup_time, jacobi_norm,
                          jacobi_step, normalize_hs)
from hs2.errors import ConfigError, HS2Error
from hs2.expressions import parse_field
from hs2.field import DEFAULT_N, MIN_N
from hs2.group import TangentPair

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2, 3

DEFAULT_PROFILES = ["sin(1)", "sin(2)", "sin(1) + 0.3*sin(2)", "cos(1) - 1", "cos(2) - 1"]


@dataclass
class RunConfig:
    equation: str = "TwoHS"
    N: int = DEFAULT_N
    dt: float = DEFAULT_DT
    t_end: float = 1.0
    h1_scale: float = 1.0
    initial_u: str = "0.1*sin(1)"
    initial_rho: str = "1"
    seed: int = 0
    output_path: str = "hs2_run"
    # curvature
    pairs: int = 50
    max_freq: int = 6
    direction_u: str = "cos(1); cos(2)"
    direction_v: str = "cos(2); cos(1)"
    # blowup sweep
    profiles: list = field(default_factory=lambda: list(DEFAULT_PROFILES))
    # jacobi: initial covariant derivative of the field
    jacobi_u: str = "0.1*sin(2)"
    jacobi_rho: str = "0.2*cos(1)"
    lag_euler: bool = True

    def validate(self) -> "RunConfig":
        try:
            EquationKind.parse(self.equation)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        n = self.N
        if not isinstance(n, int) or n < MIN_N or n & (n - 1):
            raise ConfigError(f"N must be a power of two >= {MIN_N}, got {n!r}")
        for name in ("dt", "t_end", "h1_scale"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ConfigError(f"{name} must be positive, got {value!r}")
        if self.pairs < 1 or not 1 <= self.max_freq < n // 2:
            raise ConfigError("pairs must be >= 1 and 1 <= max_freq < N/2")
        for expr in (self.initial_u, self.initial_rho, self.jacobi_u, self.jacobi_rho,
                     *self.profiles):
            parse_field(expr, n)
        for pair in (self.direction_u, self.direction_v):
            _parse_pair(pair, n)
        return self

    @property
    def kind(self) -> EquationKind:
        return EquationKind.parse(self.equation)

    @property
    def conv(self) -> MetricConvention:
        return MetricConvention(self.h1_scale)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        if "config" in data and isinstance(data["config"], dict):
            data = data["config"]  # a previous summary
        known = {f.name: f for f in fields(cls)}
        unknown = set(data) - set(known)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        cfg = cls(**data)
        for name, f in known.items():
            default = getattr(cls(), name)
            value = getattr(cfg, name)
            if isinstance(default, float) and isinstance(value, int) and not isinstance(value, bool):
                setattr(cfg, name, float(value))
            elif type(default) is not type(value):
                raise ConfigError(f"{name}: expected {type(default).__name__}, "
                                  f"got {type(value).__name__}")
        return cfg


def _parse_pair(text: str, n: int) -> TangentPair:
    """``"expr1; expr2"`` -> TangentPair (second part optional)."""
    parts = [p.strip() for p in str(text).split(";")]
    if len(parts) > 2 or not parts[0]:
        raise ConfigError(f"direction must be 'u1; u2', got {text!r}")
    u1 = parse_field(parts[0], n)
    u2 = parse_field(parts[1], n) if len(parts) == 2 and parts[1] else u1 * 0.0
    return TangentPair(u1, u2)


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


class _CsvSink:
    """Row writer that flushes after every row so partial output survives errors."""

    def __init__(self, path: Path, columns):
        path.parent.mkdir(parents=True, exist_ok=True)
        self._fh = open(path, "w", newline="")
        self._writer = csv.writer(self._fh)
        self._writer.writerow(columns)

    def row(self, values):
        self._writer.writerow([_fmt(v) for v in values])
        self._fh.flush()

    def close(self):
        self._fh.close()


def _json_safe(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def _write_json(path: Path, payload: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_json_safe(payload), indent=2, sort_keys=True) + "\n")


def _outputs(cfg: RunConfig):
    stem = Path(cfg.output_path)
    return stem.with_suffix(".csv"), stem.with_suffix(".json")


def _threads() -> int:
    raw = os.environ.get("HS2_THREADS")
    if raw is None:
        return os.cpu_count() or 1
    try:
        return max(1, int(raw))
    except ValueError:
        raise ConfigError(f"HS2_THREADS must be an integer, got {raw!r}") from None


def _ordered_map(func, items):
    """Map preserving input order, parallel up to HS2_THREADS workers."""
    items = list(items)
    workers = min(_threads(), len(items))
    if workers <= 1:
        return [func(i) for i in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))


# -- simulate --------------------------------------------------------------

def _initial_data(cfg: RunConfig):
    kind = cfg.kind
    u0 = parse_field(cfg.initial_u, cfg.N)
    rho0 = parse_field(cfg.initial_rho, cfg.N)
    if kind.chart and abs(u0.at_zero()) > 1e-12 * (1 + u0.sup_norm()):
        raise ConfigError(f"{kind.value}: initial_u must vanish at x = 0")
    return u0, rho0


def _gap(g: GeodesicState, e: EulerianState | None) -> float:
    if e is None:
        return math.nan
    try:
        lag = g.eulerian()
    except HS2Error:
        return math.nan
    gap = (lag.u1 - e.u).sup_norm()
    if g.kind.two_component:
        gap = max(gap, (lag.u2 - e.rho).sup_norm())
    return gap


def cmd_simulate(cfg: RunConfig) -> int:
    csv_path, json_path = _outputs(cfg)
    u0, rho0 = _initial_data(cfg)
    kind, conv = cfg.kind, cfg.conv
    g = GeodesicState.start(kind, u0, rho0)
    e = EulerianState.start(kind, u0, rho0) if cfg.lag_euler else None
    sink = _CsvSink(csv_path, ["t", "energy", "min_slope", "sup_u", "sup_rho", "lag_euler_gap"])
    summary = {"config": asdict(cfg), "blowup": False, "blowup_time": None,
               "status": "ok", "error": None}

    def record(state, euler):
        sink.row([state.t, geodesic_energy(state, conv), state.min_slope(),
                  state.velocity.u1.sup_norm(), state.velocity.u2.sup_norm(),
                  _gap(state, euler)])

    status = EXIT_OK
    try:
        record(g, e)
        while g.t < cfg.t_end - 1e-14:
            if g.min_slope() < BLOWUP_SLOPE:
                res = detect_blowup(g, cfg.t_end, cfg.dt)
                g = res.state
                summary.update(blowup=True, blowup_time=res.time)
                record(g, None)
                break
            h = min(adaptive_dt(cfg.dt, g.min_slope()), cfg.t_end - g.t)
            g = geodesic_step(g, h)
            if e is not None:
                try:
                    e = eulerian_step(e, h)
                except HS2Error:
                    e = None  # Eulerian solver gave out (near breaking); gap becomes NaN
            record(g, e)
    except HS2Error as exc:
        status = EXIT_RUNTIME
        summary.update(status="error", error=f"{type(exc).__name__}: {exc}")
    finally:
        sink.close()
    summary.update(t_final=g.t, energy=geodesic_energy(g, conv), min_slope=g.min_slope(),
                   sup_u=g.velocity.u1.sup_norm(), sup_rho=g.velocity.u2.sup_norm())
    if kind is EquationKind.HS:
        try:
            summary["blowup_time_formula"] = hs_blowup_time(u0)
        except HS2Error:
            summary["blowup_time_formula"] = None  # not unit-normalized
    _write_json(json_path, summary)
    return status


# -- curvature -------------------------------------------------------------

def cmd_curvature(cfg: RunConfig, mode: str) -> int:
    kind, conv = cfg.kind, cfg.conv
    csv_path, json_path = _outputs(cfg)
    if mode == "pair":
        u, v = _parse_pair(cfg.direction_u, cfg.N), _parse_pair(cfg.direction_v, cfg.N)
        rep = sectional_curvature(kind, conv, u, v)
        _write_json(json_path, {"config": asdict(cfg), "mode": "pair", **rep.as_dict()})
        return EXIT_OK
    rng = np.random.default_rng(cfg.seed)
    pairs = [(random_tangent(rng, kind, cfg.N, cfg.max_freq),
              random_tangent(rng, kind, cfg.N, cfg.max_freq)) for _ in range(cfg.pairs)]
    reports = _ordered_map(lambda p: sectional_curvature(kind, conv, *p), pairs)
    sink = _CsvSink(csv_path, ["pair_id", "unnormalized", "normalized", "gram_det"])
    normalized = []
    for i, rep in enumerate(reports):
        value = math.nan if rep.normalized is None else rep.normalized
        normalized.append(value)
        sink.row([i, rep.unnormalized, value, rep.gram_det])
    sink.close()
    finite = [x for x in normalized if math.isfinite(x)]
    _write_json(json_path, {"config": asdict(cfg), "mode": "scan", "pairs": cfg.pairs,
                            "normalized_min": min(finite) if finite else None,
                            "normalized_max": max(finite) if finite else None,
                            "degenerate": len(normalized) - len(finite)})
    return EXIT_OK


# -- blowup sweep ----------------------------------------------------------

def cmd_blowup(cfg: RunConfig) -> int:
    csv_path, json_path = _outputs(cfg)

    def one(expr):
        u0 = normalize_hs(parse_field(expr, cfg.N))
        t_star = hs_blowup_time(u0)
        res = detect_blowup(GeodesicState.start(EquationKind.HS, u0), t_star + 0.1, cfg.dt)
        t_sim = res.time if res.detected else math.nan
        return expr, t_star, t_sim, abs(t_sim - t_star)

    rows = _ordered_map(one, cfg.profiles)
    sink = _CsvSink(csv_path, ["profile_id", "expression", "T_formula", "T_simulated",
                               "abs_error"])
    for i, row in enumerate(rows):
        sink.row([i, *row])
    sink.close()
    worst = max(r[3] for r in rows)
    _write_json(json_path, {"config": asdict(cfg), "profiles": len(rows),
                            "max_abs_error": worst})
    return EXIT_OK


# -- jacobi ----------------------------------------------------------------

def cmd_jacobi(cfg: RunConfig) -> int:
    kind, conv, n = cfg.kind, cfg.conv, cfg.N
    csv_path, json_path = _outputs(cfg)
    u0, rho0 = _initial_data(cfg)
    v = TangentPair(u0, rho0 if kind.two_component else u0 * 0.0)
    speed = norm(kind, conv, None, v)
    if speed == 0:
        raise ConfigError("initial velocity is zero")
    v = v / speed
    eta = TangentPair(parse_field(cfg.jacobi_u, n),
                      parse_field(cfg.jacobi_rho, n) if kind.two_component
                      else parse_field(cfg.jacobi_u, n) * 0.0)
    if kind.chart:
        eta = TangentPair(eta.u1 - eta.u1.at_zero(), eta.u2)
    eta = eta - v * metric(kind, conv, None, eta, v)  # normal field
    j = JacobiState(TangentPair.zeros(n), eta, GeodesicState.start(kind, v.u1, v.u2))
    sink = _CsvSink(csv_path, ["t", "xi_norm"])
    status = EXIT_OK
    summary = {"config": asdict(cfg), "initial_dxi_norm": norm(kind, conv, None, eta),
               "status": "ok", "error": None}
    try:
        sink.row([0.0, 0.0])
        while j.geodesic.t < cfg.t_end - 1e-14:
            j = jacobi_step(j, min(cfg.dt, cfg.t_end - j.geodesic.t))
            sink.row([j.geodesic.t, jacobi_norm(j, conv)])
    except HS2Error as exc:
        status = EXIT_RUNTIME
        summary.update(status="error", error=f"{type(exc).__name__}: {exc}")
    finally:
        sink.close()
    summary.update(t_final=j.geodesic.t, xi_norm=jacobi_norm(j, conv))
    _write_json(json_path, summary)
    return status


# -- verify ----------------------------------------------------------------

def cmd_verify(level: str, h1_scale: float, seed: int | None, json_out: str | None) -> int:
    from hs2.verification import DEFAULT_SEED, run_suite

    results = run_suite(level, h1_scale, DEFAULT_SEED if seed is None else seed,
                        report=lambda r: print(r.line(), flush=True))
    failed = [r for r in results if not r.passed]
    payload = {"level": level, "h1_scale": h1_scale, "passed": not failed,
               "criteria": [r.as_dict() for r in results]}
    if json_out:
        _write_json(Path(json_out), payload)
    else:
        print(json.dumps(_json_safe(payload), sort_keys=True))
    for r in failed:
        print(f"criterion {r.number} failed: {r.name}", file=sys.stderr)
    return EXIT_VERIFY if failed else EXIT_OK


# -- argument parsing ------------------------------------------------------

_OVERRIDES = [
    ("--equation", "equation", str), ("--N", "N", int), ("--dt", "dt", float),
    ("--t-end", "t_end", float), ("--h1-scale", "h1_scale", float),
    ("--u0", "initial_u", str), ("--rho0", "initial_rho", str), ("--seed", "seed", int),
    ("--output", "output_path", str), ("--pairs", "pairs", int),
    ("--max-freq", "max_freq", int), ("--u", "direction_u", str),
    ("--v", "direction_v", str), ("--jacobi-u", "jacobi_u", str),
    ("--jacobi-rho", "jacobi_rho", str),
]


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hs2", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def run_parser(name, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="JSON config or previous summary")
        for flag, dest, typ in _OVERRIDES:
            p.add_argument(flag, dest=dest, type=typ, default=None)
        return p

    run_parser("simulate", "integrate a geodesic and write a time series")
    p = run_parser("curvature", "sectional curvature of a pair or a random scan")
    p.add_argument("mode", choices=["pair", "scan"])
    p = run_parser("blowup", "HS blow-up times for a sweep of profiles")
    p.add_argument("--profile", action="append", dest="profiles_cli",
                   help="profile expression (repeatable)")
    run_parser("jacobi", "normal Jacobi field norm along a geodesic")
    v = sub.add_parser("verify", help="run the acceptance suite")
    v.add_argument("--level", choices=["quick", "full"], default="quick")
    v.add_argument("--h1-scale", type=float, default=1.0)
    v.add_argument("--seed", type=int, default=None)
    v.add_argument("--json", dest="json_out", default=None)
    return parser


def load_config(args) -> RunConfig:
    data = {}
    if getattr(args, "config", None):
        try:
            data = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
    cfg = RunConfig.from_dict(data)
    for _, dest, _ in _OVERRIDES:
        value = getattr(args, dest, None)
        if value is not None:
            setattr(cfg, dest, value)
    if getattr(args, "profiles_cli", None):
        cfg.profiles = list(args.profiles_cli)
    return cfg.validate()


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "verify":
            if not (math.isfinite(args.h1_scale) and args.h1_scale > 0):
                raise ConfigError("h1_scale must be positive")
            return cmd_verify(args.level, args.h1_scale, args.seed, args.json_out)
        cfg = load_config(args)
        if args.command == "simulate":
            return cmd_simulate(cfg)
        if args.command == "curvature":
            return cmd_curvature(cfg, args.mode)
        if args.command == "blowup":
            return cmd_blowup(cfg)
        return cmd_jacobi(cfg)
    except ConfigError as exc:
        print(f"hs2: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except HS2Error as exc:
        print(f"hs2: runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
