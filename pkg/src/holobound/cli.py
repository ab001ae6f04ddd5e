"""Batch experiment driver with machine-readable CSV/JSON outputs.

Every experiment is described by a JSON config; outputs are deterministic
given the config and its seed (float fields are emitted with shortest
round-trip repr), except for a timestamp confined to the JSON summary.
Exit codes: 0 success, 2 config error, 3 numeric failure, 4 certificate
failure.
"""

from __future__ import annotations

import argparse
import datetime
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import bounds as bounds_mod
from . import equivalence as equiv_mod
from . import potential as potential_mod
from .kernel import (
    PositiveDefinitenessError,
    SampleFunction,
    build_kernel_estimate,
)
from .quadrature import (
    NonFiniteIntegrandError,
    disk_lattice,
    random_disk_points,
    truncated_plane_rule,
)
from .weights import WeightError, WeightFunction, eval_weight, truncation_radius

__all__ = ["ConfigError", "ExperimentConfig", "load_config", "run", "sweep", "main"]

SCHEMA_VERSION = "v1"
EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_CERTIFICATE = 4

EXPERIMENTS = (
    "kernel-diag",
    "verify-bound",
    "constants",
    "equivalence",
    "potential",
    "mean-value",
    "sweep",
)

_TOP_KEYS = {
    "experiment", "weight", "weight_b", "degree", "resolution", "grid",
    "seed", "tolerance", "s_values", "label", "configs", "out",
}
_GRID_KEYS = {
    "lattice": {"kind", "radius", "spacing"},
    "random": {"kind", "radius", "count"},
    "points": {"kind", "points"},
}


class ConfigError(Exception):
    """Malformed experiment configuration."""


@dataclass
class ExperimentConfig:
    experiment: str
    weight: dict | None = None
    weight_b: dict | None = None
    degree: int = 40
    resolution: int = 128
    grid: dict | None = None
    seed: int = 0
    tolerance: float | None = None
    s_values: tuple = (0.3, 0.9)
    label: str = ""
    configs: tuple = ()
    out: str = "."


def _validate_grid(grid: dict) -> dict:
    if not isinstance(grid, dict):
        raise ConfigError(f"grid must be an object, got {type(grid).__name__}")
    kind = grid.get("kind")
    if kind not in _GRID_KEYS:
        raise ConfigError(f"unknown grid kind {kind!r}")
    unknown = set(grid) - _GRID_KEYS[kind]
    if unknown:
        raise ConfigError(f"unknown grid keys: {sorted(unknown)}")
    return grid


def parse_config(raw: dict, allow_sweep: bool = True) -> ExperimentConfig:
    if not isinstance(raw, dict):
        raise ConfigError(f"config must be an object, got {type(raw).__name__}")
    unknown = set(raw) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    experiment = raw.get("experiment")
    if experiment not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {experiment!r}; "
                          f"expected one of {', '.join(EXPERIMENTS)}")
    if experiment == "sweep" and not allow_sweep:
        raise ConfigError("sweep entries may not be nested sweeps")
    cfg = ExperimentConfig(experiment=experiment)
    if "weight" in raw:
        cfg.weight = raw["weight"]
    if "weight_b" in raw:
        cfg.weight_b = raw["weight_b"]
    if "degree" in raw:
        cfg.degree = int(raw["degree"])
        if not (0 <= cfg.degree <= 64):
            raise ConfigError(f"degree must lie in [0, 64], got {cfg.degree}")
    if "resolution" in raw:
        cfg.resolution = int(raw["resolution"])
        if not (8 <= cfg.resolution <= 4096):
            raise ConfigError(f"resolution must lie in [8, 4096], got {cfg.resolution}")
    if "grid" in raw:
        cfg.grid = _validate_grid(raw["grid"])
    if "seed" in raw:
        cfg.seed = int(raw["seed"])
        if cfg.seed < 0:
            raise ConfigError(f"seed must be nonnegative, got {cfg.seed}")
    if "tolerance" in raw:
        cfg.tolerance = float(raw["tolerance"])
    if "s_values" in raw:
        cfg.s_values = tuple(float(s) for s in raw["s_values"])
    if "label" in raw:
        cfg.label = str(raw["label"])
    if "out" in raw:
        cfg.out = str(raw["out"])
    if "configs" in raw:
        if experiment != "sweep":
            raise ConfigError("'configs' is only valid for sweep")
        cfg.configs = tuple(parse_config(entry, allow_sweep=False)
                            for entry in raw["configs"])
        kinds = {c.experiment for c in cfg.configs}
        if len(kinds) > 1:
            raise ConfigError(f"sweep entries must share one experiment type, "
                              f"got {sorted(kinds)}")
    if experiment == "sweep" and "configs" not in raw:
        raise ConfigError("sweep requires a 'configs' list")
    return cfg


def load_config(path: str) -> ExperimentConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return parse_config(raw)


def _require_weight(cfg: ExperimentConfig, key: str = "weight") -> WeightFunction:
    desc = getattr(cfg, key)
    if desc is None:
        raise ConfigError(f"experiment {cfg.experiment!r} requires a {key!r} entry")
    try:
        return WeightFunction.from_json(desc)
    except WeightError as exc:
        raise ConfigError(f"invalid {key}: {exc}") from exc


def _build_grid(cfg: ExperimentConfig, default: dict) -> np.ndarray:
    grid_spec = cfg.grid if cfg.grid is not None else default
    kind = grid_spec["kind"]
    if kind == "lattice":
        return disk_lattice(float(grid_spec["radius"]), float(grid_spec["spacing"]))
    if kind == "random":
        return random_disk_points(int(grid_spec["count"]), float(grid_spec["radius"]),
                                  cfg.seed)
    pts = grid_spec.get("points", [])
    if not pts:
        raise ConfigError("grid kind 'points' needs a nonempty 'points' list")
    return np.asarray([complex(p[0], p[1]) for p in pts])


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


@dataclass
class ExperimentResult:
    code: int
    summary: dict
    header: tuple
    rows: list = field(default_factory=list)

    def metric_row(self) -> dict:
        return {k: v for k, v in self.summary.items()
                if isinstance(v, (int, float, bool, str)) and k != "experiment"}


# ---------------------------------------------------------------------------
# Experiment implementations
# ---------------------------------------------------------------------------

def _run_kernel_diag(cfg: ExperimentConfig) -> ExperimentResult:
    w = _require_weight(cfg)
    grid = _build_grid(cfg, {"kind": "lattice", "radius": 2.0, "spacing": 0.1})
    rule = truncated_plane_rule(truncation_radius(w, cfg.degree),
                                cfg.resolution, 2 * cfg.resolution)
    est = build_kernel_estimate(w, cfg.degree, rule)
    diag = np.atleast_1d(est.diag(grid))
    rows = [(z.real, z.imag, cfg.degree, d, est.condition_estimate)
            for z, d in zip(grid, diag)]
    summary = {
        "experiment": "kernel-diag",
        "n_points": len(grid),
        "degree": cfg.degree,
        "effective_degree": est.effective_degree,
        "degraded": bool(est.degraded),
        "condition_estimate": est.condition_estimate,
        "diag_max": float(diag.max()),
        "diag_min": float(diag.min()),
        "resolution": cfg.resolution,
    }
    return ExperimentResult(EXIT_OK, summary,
                            ("z_re", "z_im", "N", "K_N", "condition_estimate"), rows)


def _run_verify_bound(cfg: ExperimentConfig) -> ExperimentResult:
    w = _require_weight(cfg)
    M = w.laplacian_bounds[1]
    grid = _build_grid(cfg, {"kind": "lattice", "radius": 2.0, "spacing": 0.1})
    rule = truncated_plane_rule(truncation_radius(w, cfg.degree),
                                cfg.resolution, 2 * cfg.resolution)
    cert = bounds_mod.global_certificate(w, M, grid, cfg.degree, rule)
    est = build_kernel_estimate(w, cfg.degree, rule)
    products = np.atleast_1d(est.diag(grid)) * np.exp(-np.asarray(eval_weight(w, grid)))
    rows = [(z.real, z.imag, p, cert.constant_C, cert.constant_C - p)
            for z, p in zip(grid, products)]
    summary = {
        "experiment": "verify-bound",
        "pass": bool(cert.passed),
        "constant_C": cert.constant_C,
        "measured_sup": cert.measured_sup,
        "B_used": cert.metadata["B_used"],
        "M": M,
        "N": cfg.degree,
        "resolution": cfg.resolution,
        "margin": cert.margin,
        "error_estimate": cert.error_estimate,
        "tighter_constant": cert.metadata["tighter_constant"],
    }
    code = EXIT_OK if cert.passed else EXIT_CERTIFICATE
    return ExperimentResult(code, summary,
                            ("z_re", "z_im", "weighted_diag", "constant_C", "margin"),
                            rows)


def _run_constants(cfg: ExperimentConfig) -> ExperimentResult:
    w = _require_weight(cfg)
    M = w.laplacian_bounds[1]
    pf = potential_mod.make_psi(w, M)
    B = pf.B_used
    phi0 = float(pf.phi(0.0 + 0.0j))
    lo, hi = potential_mod.B_BRACKET
    rows = [(B, lo, hi, phi0, -M / 4.0)]
    summary = {
        "experiment": "constants",
        "B_used": B,
        "bracket_lo": lo,
        "bracket_hi": hi,
        "phi0": phi0,
        "minus_M_over_4": -M / 4.0,
        "M": M,
        "constant_C": bounds_mod.certificate_constant(M, B),
    }
    return ExperimentResult(EXIT_OK, summary,
                            ("B_used", "bracket_lo", "bracket_hi", "phi0",
                             "minus_M_over_4"), rows)


def _run_equivalence(cfg: ExperimentConfig) -> ExperimentResult:
    wa = _require_weight(cfg, "weight")
    wb = _require_weight(cfg, "weight_b")
    da, db = equiv_mod.WeightDensity(wa), equiv_mod.WeightDensity(wb)
    tol = cfg.tolerance if cfg.tolerance is not None else 1e-8
    grid = _build_grid(cfg, {"kind": "lattice", "radius": 2.0, "spacing": 0.25})
    verdict = equiv_mod.log_laplacian_equal(da, db, grid, tol)
    summary = {
        "experiment": "equivalence",
        "equivalent": bool(verdict.passed),
        "criterion_deviation": verdict.checks[0].value,
        "tolerance": tol,
    }
    rows = []
    if verdict.passed:
        emap = equiv_mod.build_equivalence_map(da, db)
        residuals = np.abs(np.abs(emap(grid)) ** 2 * db.density(grid)
                           / da.density(grid) - 1.0)
        rows = [(z.real, z.imag, r) for z, r in zip(grid, residuals)]
        summary["exponent_coefficients"] = [[c.real, c.imag]
                                            for c in emap.exponent_coefficients]
        summary["max_residual"] = float(residuals.max())
    code = EXIT_OK if verdict.passed else EXIT_CERTIFICATE
    return ExperimentResult(code, summary, ("z_re", "z_im", "residual"), rows)


def _run_potential(cfg: ExperimentConfig) -> ExperimentResult:
    w = _require_weight(cfg)
    M = w.laplacian_bounds[1]
    pf = potential_mod.make_psi(w, M, resolution=max(cfg.resolution, 64))
    grid = _build_grid(cfg, {"kind": "random", "radius": 0.98, "count": 200})
    tol = cfg.tolerance if cfg.tolerance is not None else 1e-3
    report = potential_mod.verify_potential_bounds(pf, grid, tol)
    phi_vals = pf.phi(grid)
    rows = [(z.real, z.imag, p) for z, p in zip(grid, phi_vals)]
    summary = {
        "experiment": "potential",
        "pass": bool(report.passed),
        "B_used": pf.B_used,
        "M": M,
        "phi_sup": report.check("phi_upper").value,
        "phi_upper_limit": report.check("phi_upper").limit,
        "phi0": report.check("phi_at_origin").value,
        "phi0_lower_limit": report.check("phi_at_origin").limit,
        "poisson_residual": report.check("poisson_residual").value,
        "resolution": cfg.resolution,
    }
    code = EXIT_OK if report.passed else EXIT_CERTIFICATE
    return ExperimentResult(code, summary, ("z_re", "z_im", "phi"), rows)


_MEAN_VALUE_SAMPLES = (
    ("one", SampleFunction.polynomial([1.0])),
    ("omega", SampleFunction.polynomial([0.0, 1.0])),
    ("omega_sq", SampleFunction.polynomial([0.0, 0.0, 1.0])),
    ("exp_omega", SampleFunction.exponential(1.0)),
)


def _run_mean_value(cfg: ExperimentConfig) -> ExperimentResult:
    tol = cfg.tolerance if cfg.tolerance is not None else 1e-8
    rows = []
    worst = 0.0
    for s in cfg.s_values:
        for name, h in _MEAN_VALUE_SAMPLES:
            report = bounds_mod.mean_value_check(h, s, tol=tol)
            dev = report.checks[0].value
            worst = max(worst, dev)
            rows.append((name, s, dev))
    summary = {
        "experiment": "mean-value",
        "max_deviation": worst,
        "tolerance": tol,
        "pass": worst <= tol,
    }
    code = EXIT_OK if worst <= tol else EXIT_CERTIFICATE
    return ExperimentResult(code, summary, ("sample", "s", "deviation"), rows)


_RUNNERS = {
    "kernel-diag": _run_kernel_diag,
    "verify-bound": _run_verify_bound,
    "constants": _run_constants,
    "equivalence": _run_equivalence,
    "potential": _run_potential,
    "mean-value": _run_mean_value,
}


def _run_sweep(cfg: ExperimentConfig) -> ExperimentResult:
    rows = []
    metric_keys: list = []
    results = []
    for entry in cfg.configs:
        try:
            res = _RUNNERS[entry.experiment](entry)
            results.append((entry, "ok", res))
            for k in res.metric_row():
                if k not in metric_keys:
                    metric_keys.append(k)
        except Exception as exc:  # individual failures recorded, sweep continues
            results.append((entry, f"error:{type(exc).__name__}", None))
    header = ("index", "label", "status", *metric_keys)
    for i, (entry, status, res) in enumerate(results):
        metrics = res.metric_row() if res is not None else {}
        rows.append((i, entry.label, status,
                     *[_fmt(metrics[k]) if k in metrics else "" for k in metric_keys]))
    summary = {
        "experiment": "sweep",
        "n_entries": len(cfg.configs),
        "n_failed": sum(1 for _, status, _ in results if status != "ok"),
        "entry_experiment": cfg.configs[0].experiment if cfg.configs else None,
    }
    return ExperimentResult(EXIT_OK, summary, header, rows)


def _execute(cfg: ExperimentConfig) -> ExperimentResult:
    if cfg.experiment == "sweep":
        return _run_sweep(cfg)
    return _RUNNERS[cfg.experiment](cfg)


def _write_outputs(cfg: ExperimentConfig, result: ExperimentResult, out_dir: str):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stem = f"{cfg.label}_{cfg.experiment}" if cfg.label else cfg.experiment
    csv_path = out / f"{stem}.csv"
    lines = [f"# schema holobound.{cfg.experiment}.{SCHEMA_VERSION}",
             ",".join(result.header)]
    lines.extend(",".join(_fmt(v) for v in row) for row in result.rows)
    csv_path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")

    summary = dict(result.summary)
    summary["schema"] = f"holobound.{cfg.experiment}.{SCHEMA_VERSION}"
    summary["seed"] = cfg.seed
    summary["timestamp"] = datetime.datetime.now(datetime.timezone.utc).isoformat()
    json_path = out / f"{stem}_summary.json"
    json_path.write_text(json.dumps(summary, sort_keys=True, indent=2) + "\n",
                         encoding="utf-8")
    return csv_path, json_path


def run(cfg: ExperimentConfig, out_dir: str | None = None) -> int:
    """Run one experiment, writing its CSV and JSON summary.

    All computation happens before any file is touched, so failed runs leave
    no partial outputs.
    """
    result = _execute(cfg)
    _write_outputs(cfg, result, out_dir if out_dir is not None else cfg.out)
    return result.code


def sweep(configs, out_dir: str = ".", label: str = "") -> int:
    """Aggregate many homogeneous experiment configs into one CSV."""
    cfg = parse_config({
        "experiment": "sweep",
        "configs": list(configs),
        "label": label,
    })
    return run(cfg, out_dir)


# ---------------------------------------------------------------------------
# Command line front end
# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="holobound",
        description="Weighted holomorphic L2 kernel experiments",
    )
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="path to a JSON experiment config")
        p.add_argument("--out", help="output directory (default: config's, else '.')")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--resolution", type=int, help="override the quadrature resolution")
        p.add_argument("--degree", type=int, help="override the truncation degree")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.config is not None:
            cfg = load_config(args.config)
            if cfg.experiment != args.experiment:
                raise ConfigError(
                    f"config is for experiment {cfg.experiment!r}, "
                    f"but {args.experiment!r} was requested")
        else:
            if args.experiment != "mean-value":
                raise ConfigError(f"experiment {args.experiment!r} needs --config")
            cfg = parse_config({"experiment": "mean-value"})
        if args.seed is not None:
            cfg.seed = args.seed
        if args.resolution is not None:
            if not (8 <= args.resolution <= 4096):
                raise ConfigError(f"resolution must lie in [8, 4096], got {args.resolution}")
            cfg.resolution = args.resolution
        if args.degree is not None:
            if not (0 <= args.degree <= 64):
                raise ConfigError(f"degree must lie in [0, 64], got {args.degree}")
            cfg.degree = args.degree
        code = run(cfg, args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (PositiveDefinitenessError, NonFiniteIntegrandError, WeightError,
            ArithmeticError, ValueError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    if code == EXIT_CERTIFICATE:
        print("certificate failed", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
