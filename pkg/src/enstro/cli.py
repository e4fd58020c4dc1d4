"""Command-line laboratory driver.

Every experiment the package supports is reachable as a subcommand.  A
run creates ``runs/<timestamp>_<command>/`` (root overridable via the
``ENSTRO_RUNS_DIR`` environment variable or ``--runs-dir``), fills it
with CSV/field/JSON outputs, and finishes by atomically writing
``manifest.json`` naming every output file, the fully resolved
configuration, and a pass/fail entry per assertion in scope.

Exit codes: 0 all assertions passed, 1 an assertion or run failed,
2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .bounds_lab import (
    LowerBoundDatumSpec,
    SweepResult,
    build_lower_bound_datum,
    characteristics_report,
    datum_family,
    dissipation_window,
    fit_power_law,
)
from .burgers_solver import SolverConfig, simulate, sup_enstrophy
from .conslaw_nd import (
    FieldND,
    GridSpecND,
    get_flux,
    simulate_nd,
    write_field_nd,
    write_nd_diagnostics_csv,
)
from .exact_oracles import heat_estimate_ratios, hopf_cole_solution
from .extremizers import (
    OptimConfig,
    default_seeds,
    finite_time_maximize,
    instantaneous_maximize,
)
from .field_core import Field1D, GridSpec1D, enstrophy, write_field


class ConfigFileError(ValueError):
    """A configuration file entry is malformed, unknown, or mistyped."""


# ----------------------------------------------------------------------
# option schemas: name -> (type, default, help)
# ----------------------------------------------------------------------

_INIT_CHOICES = ("sine", "sine2", "mix", "lower-bound", "smoothed-step")

SCHEMAS: dict[str, dict[str, tuple[type, object, str]]] = {
    "simulate": {
        "nu": (float, 0.05, "viscosity"),
        "init": (str, "sine", f"initial datum, one of {_INIT_CHOICES}"),
        "amp": (float, 0.9, "amplitude scale for the datum"),
        "n_points": (int, 512, "grid points (power of two)"),
        "t_end": (float, 0.5, "final time"),
        "cfl": (float, 0.4, "CFL number"),
        "stride": (int, 1, "snapshot thinning stride"),
    },
    "oracle-check": {
        "nu": (float, 0.05, "viscosity"),
        "t": (float, 0.5, "comparison time"),
        "n_points": (int, 1024, "grid points"),
        "amp": (float, 1.0, "sine amplitude"),
        "tol": (float, 1e-6, "relative L2 error tolerance"),
    },
    "heat-estimates": {
        "n_points": (int, 4096, "grid points for the test family"),
        "nu": (float, 1.0, "diffusivity"),
        "t_count": (int, 25, "log-spaced times in [1e-6, 1]"),
        "bound": (float, 0.75, "single constant both ratios must stay under"),
    },
    "sweep-nu": {
        "family": (str, "lower-bound", "datum family: lower-bound or sine"),
        "nu_min": (float, 1e-3, "smallest viscosity"),
        "nu_max": (float, 10 ** -1.5, "largest viscosity"),
        "count": (int, 6, "number of log-spaced viscosities"),
        "t_end": (float, 2.0, "horizon for each run"),
        "n_points": (int, 0, "grid points; 0 = auto from the finest nu"),
    },
    "sweep-e0": {
        "nu": (float, 1.0, "viscosity"),
        "e0_min": (float, 16.0, "smallest initial enstrophy"),
        "e0_max": (float, 1024.0, "largest initial enstrophy"),
        "count": (int, 7, "number of log-spaced enstrophy levels"),
        "prefactors": (str, "0.5,1,2", "comma list: T = p / sqrt(E0)"),
        "n_points": (int, 256, "grid points"),
        "max_iters": (int, 80, "ascent iterations per start"),
        "seeds": (int, 2, "multi-start seeds per (E0, prefactor)"),
    },
    "maximize-instant": {
        "e0": (float, 1.0, "enstrophy level of the sphere"),
        "nu": (float, 0.1, "viscosity"),
        "n_points": (int, 512, "grid points"),
        "max_iters": (int, 500, "ascent iterations"),
        "grad_tol": (float, 1e-7, "relative gradient-norm stop"),
        "inner_product": (str, "h1", "ascent metric: l2 or h1"),
    },
    "maximize-finite": {
        "e0": (float, 1.0, "enstrophy level of the sphere"),
        "nu": (float, 0.05, "viscosity"),
        "horizon": (float, 0.15, "objective time T"),
        "n_points": (int, 256, "grid points"),
        "max_iters": (int, 60, "ascent iterations"),
        "grad_tol": (float, 1e-6, "relative gradient-norm stop"),
        "inner_product": (str, "h1", "ascent metric: l2 or h1"),
        "seed_index": (int, 0, "which deterministic seed to start from"),
    },
    "lower-bound": {
        "n_points": (int, 1024, "grid points"),
        "delta_s": (float, 1.0 / 48.0, "mollification radius of the shoulders"),
    },
    "dissipation": {
        "nu": (float, 1e-3, "viscosity"),
        "eps": (float, 0.02, "window margin"),
        "n_points": (int, 0, "grid points; 0 = auto"),
    },
    "conslaw-nd": {
        "dim": (int, 2, "space dimension, 1 or 2"),
        "n_points": (int, 64, "cells per axis (power of two)"),
        "flux": (str, "burgers2d", "flux name from the registry"),
        "nu": (float, 0.01, "viscosity"),
        "t_end": (float, 0.1, "final time"),
        "init": (str, "product", "datum: product, diag, or mixed"),
        "stride": (int, 1, "diagnostics thinning stride"),
    },
    "report": {},
}

_COMMON = {
    "config": (str, "", "key = value config file; flags override it"),
    "runs_dir": (str, "", "run-directory root (default ./runs or ENSTRO_RUNS_DIR)"),
    "jobs": (int, 1, "worker threads for sweep points"),
    "seed": (int, 2025, "seed for deterministic multi-start fields"),
}


def load_config(path: str | Path, schema: dict) -> dict:
    """Parse a flat ``key = value`` file against the command's schema."""
    resolved: dict[str, object] = {}
    text = Path(path).read_text()
    valid = ", ".join(sorted(schema))
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigFileError(
                f"{path}:{lineno}: expected 'key = value', got {raw!r}"
            )
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key not in schema:
            raise ConfigFileError(
                f"{path}:{lineno}: unknown config key {key!r}; "
                f"valid keys: {valid}"
            )
        typ = schema[key][0]
        try:
            resolved[key] = _parse_value(value, typ)
        except ValueError:
            raise ConfigFileError(
                f"{path}:{lineno}: could not parse {value!r} as "
                f"{typ.__name__} for key {key!r}"
            ) from None
    return resolved


def _parse_value(value: str, typ: type):
    if typ is bool:
        low = value.lower()
        if low in ("true", "1", "yes"):
            return True
        if low in ("false", "0", "no"):
            return False
        raise ValueError(value)
    return typ(value)


# ----------------------------------------------------------------------
# run-directory and manifest plumbing
# ----------------------------------------------------------------------


def _runs_root(cli_value: str) -> Path:
    if cli_value:
        return Path(cli_value)
    env = os.environ.get("ENSTRO_RUNS_DIR", "")
    return Path(env) if env else Path("runs")


def _make_run_dir(root: Path, command: str) -> Path:
    stamp = time.strftime("%Y%m%d-%H%M%S")
    base = root / f"{stamp}_{command}"
    path = base
    counter = 1
    while path.exists():
        path = Path(f"{base}-{counter}")
        counter += 1
    path.mkdir(parents=True)
    return path


def _write_manifest(
    run_dir: Path,
    command: str,
    config: dict,
    seed: int,
    started: str,
    outputs: list[str],
    assertions: list[dict],
) -> None:
    for name in outputs:
        if not (run_dir / name).exists():
            raise FileNotFoundError(
                f"manifest names missing output file {name!r}"
            )
    manifest = {
        "command": command,
        "version": __version__,
        "config": config,
        "seed": seed,
        "started": started,
        "finished": time.strftime("%Y-%m-%dT%H:%M:%S"),
        "outputs": sorted(outputs),
        "assertions": assertions,
        "passed": all(a["passed"] for a in assertions),
    }
    tmp = run_dir / "manifest.json.tmp"
    tmp.write_text(json.dumps(manifest, indent=2, default=float) + "\n")
    os.replace(tmp, run_dir / "manifest.json")


def _assertion(name: str, passed: bool, detail: str) -> dict:
    return {"name": name, "passed": bool(passed), "detail": detail}


# ----------------------------------------------------------------------
# data constructors shared by subcommands
# ----------------------------------------------------------------------


def _initial_field(init: str, amp: float, grid: GridSpec1D) -> Field1D:
    x = grid.x
    if init == "sine":
        return Field1D(grid, amp * np.sin(2 * np.pi * x))
    if init == "sine2":
        return Field1D(grid, amp * np.sin(4 * np.pi * x))
    if init == "mix":
        vals = amp * (
            np.sin(2 * np.pi * x)
            + 0.5 * np.sin(4 * np.pi * x)
            + 0.25 * np.sin(6 * np.pi * x)
        )
        return Field1D(grid, vals)
    if init == "smoothed-step":
        vals = amp * np.tanh(np.sin(2 * np.pi * x) / 0.1)
        return Field1D(grid, vals - vals.mean())
    if init == "lower-bound":
        u0, _ = build_lower_bound_datum(LowerBoundDatumSpec(grid=grid))
        return Field1D(grid, amp * u0.values)
    raise ConfigFileError(
        f"unknown init {init!r}; valid: {', '.join(_INIT_CHOICES)}"
    )


def nd_initial_datum(init: str, grid: GridSpecND) -> FieldND:
    coords = grid.axis_coords()
    if grid.dim == 1:
        base = {"product": np.sin(2 * np.pi * coords)}.get(init)
        if base is None:
            base = np.sin(2 * np.pi * coords)
        vals = base
    else:
        xx, yy = np.meshgrid(coords, coords, indexing="ij")
        if init == "product":
            vals = np.sin(2 * np.pi * xx) * np.sin(2 * np.pi * yy)
        elif init == "diag":
            vals = np.sin(2 * np.pi * (xx + yy))
        elif init == "mixed":
            vals = np.sin(2 * np.pi * xx) * np.sin(2 * np.pi * yy) + 0.5 * np.sin(
                4 * np.pi * xx
            ) * np.cos(2 * np.pi * yy)
        else:
            raise ConfigFileError(
                f"unknown init {init!r}; valid: product, diag, mixed"
            )
    grad_sq = np.zeros_like(vals)
    for ax in range(grid.dim):
        d = (np.roll(vals, -1, axis=ax) - np.roll(vals, 1, axis=ax)) / (
            2.0 * grid.dx
        )
        grad_sq = grad_sq + d * d
    e0 = float(grad_sq.mean()) * grid.length**grid.dim
    return FieldND(grid, vals / np.sqrt(e0))


def _monotone_assertions(diag) -> list[dict]:
    linf_ok = bool(
        np.all(np.diff(diag.linf) <= diag.linf[:-1] * 1e-8 + 1e-14)
    )
    tv_ok = bool(np.all(np.diff(diag.tv) <= 1e-6))
    return [
        _assertion(
            "sup_norm_nonincreasing",
            linf_ok,
            f"max |u| start {float(diag.linf[0])!r}",
        ),
        _assertion("tv_nonincreasing", tv_ok, f"TV start {float(diag.tv[0])!r}"),
    ]


# ----------------------------------------------------------------------
# subcommand implementations: cfg -> (outputs, assertions)
# ----------------------------------------------------------------------


def _cmd_simulate(cfg: dict, run_dir: Path, jobs: int, seed: int):
    grid = GridSpec1D(cfg["n_points"])
    u0 = _initial_field(cfg["init"], cfg["amp"], grid)
    sim_cfg = SolverConfig(
        nu=cfg["nu"],
        t_end=cfg["t_end"],
        cfl=cfg["cfl"],
        sample_stride=cfg["stride"],
    )
    traj, diag = simulate(u0, sim_cfg)
    write_field(u0, run_dir / "initial.dat")
    write_field(traj.final, run_dir / "final.dat")
    diag.to_csv(run_dir / "diagnostics.csv")
    checks = _monotone_assertions(diag)
    mean_ok = abs(float(traj.final.values.mean())) <= 1e-11
    checks.append(_assertion("mean_preserved", mean_ok, "zero mean at t_end"))
    return ["initial.dat", "final.dat", "diagnostics.csv"], checks


def _cmd_oracle_check(cfg: dict, run_dir: Path, jobs: int, seed: int):
    grid = GridSpec1D(cfg["n_points"])
    u0 = Field1D(grid, cfg["amp"] * np.sin(2 * np.pi * grid.x))
    sim_cfg = SolverConfig(nu=cfg["nu"], t_end=cfg["t"])
    traj, diag = simulate(u0, sim_cfg)
    exact = hopf_cole_solution(u0, cfg["nu"], cfg["t"])
    num = traj.final.values
    rel = float(
        np.sqrt(np.mean((num - exact.values) ** 2))
        / np.sqrt(np.mean(exact.values**2))
    )
    diag.to_csv(run_dir / "diagnostics.csv")
    (run_dir / "report.json").write_text(
        json.dumps({"rel_l2_error": rel, "tol": cfg["tol"]}, indent=2) + "\n"
    )
    checks = [
        _assertion(
            "matches_heat_kernel_solution",
            rel < cfg["tol"],
            f"relative L2 error {rel:.3e} vs tol {cfg['tol']:.1e}",
        )
    ]
    return ["diagnostics.csv", "report.json"], checks


def _heat_family(grid: GridSpec1D, seed: int):
    x = grid.x
    rng = np.random.default_rng(seed)
    fields = []
    for k in (1, 2, 5, 16):
        fields.append((f"mode{k}", np.sin(2 * np.pi * k * x)))
    fields.append(
        (
            "mix",
            np.sin(2 * np.pi * x)
            + 0.5 * np.sin(6 * np.pi * x)
            + 0.2 * np.cos(10 * np.pi * x),
        )
    )
    for w in (0.02, 0.1):
        fields.append((f"step{w:g}", np.tanh(np.sin(2 * np.pi * x) / w)))
    for i in range(3):
        coeffs = rng.normal(size=8) / np.arange(1, 9)
        vals = np.zeros_like(x)
        for j, c in enumerate(coeffs):
            vals += c * np.sin(2 * np.pi * (j + 1) * x + rng.uniform(0, 2 * np.pi))
        fields.append((f"random{i}", vals))
    return [(name, Field1D(grid, v - v.mean())) for name, v in fields]


def _cmd_heat_estimates(cfg: dict, run_dir: Path, jobs: int, seed: int):
    grid = GridSpec1D(cfg["n_points"])
    family = _heat_family(grid, seed)
    ts = np.logspace(-6.0, 0.0, cfg["t_count"])
    lines = ["field,t,r1,r2"]
    worst1 = worst2 = 0.0
    for name, field in family:
        for t in ts:
            r1, r2 = heat_estimate_ratios(field, cfg["nu"], float(t))
            worst1, worst2 = max(worst1, r1), max(worst2, r2)
            lines.append(f"{name},{float(t)!r},{float(r1)!r},{float(r2)!r}")
    (run_dir / "ratios.csv").write_text("\n".join(lines) + "\n")

    # closed-form single-mode anchor on a fine grid
    fine = GridSpec1D(16384)
    mode = Field1D(fine, np.sin(2 * np.pi * fine.x))
    cf_err = 0.0
    for t in (1e-4, 1e-3, 1e-2, 0.1):
        r1, r2 = heat_estimate_ratios(mode, 1.0, t)
        c1 = (np.pi / np.sqrt(2.0)) * np.exp(-4 * np.pi**2 * t) * t**0.25
        c2 = np.sqrt(2.0) * np.pi**2 * np.exp(-4 * np.pi**2 * t) * t**0.75
        cf_err = max(cf_err, abs(r1 - c1) / c1, abs(r2 - c2) / c2)
    report = {
        "max_r1": worst1,
        "max_r2": worst2,
        "bound": cfg["bound"],
        "closed_form_rel_err": cf_err,
    }
    (run_dir / "report.json").write_text(json.dumps(report, indent=2) + "\n")
    checks = [
        _assertion(
            "ratios_bounded_by_one_constant",
            max(worst1, worst2) <= cfg["bound"],
            f"max r1 {worst1:.4f}, max r2 {worst2:.4f}, bound {cfg['bound']}",
        ),
        _assertion(
            "single_mode_closed_form",
            cf_err < 1e-8,
            f"worst relative deviation {cf_err:.3e}",
        ),
    ]
    return ["ratios.csv", "report.json"], checks


def _auto_points(nu_min: float, linf: float) -> int:
    import math

    needed = 4.0 * linf / nu_min
    return max(512, 2 ** math.ceil(math.log2(needed)))


def run_sweep_nu(cfg: dict, jobs: int) -> tuple[SweepResult | None, list, str]:
    """Fan the viscosity sweep across a worker pool; rows stay ordered.

    Returns (result, partial_rows, error): on success error is empty and
    partial_rows equals the full row list; on a run failure result is
    None and partial_rows holds the completed prefix.
    """
    nus = list(
        np.logspace(np.log10(cfg["nu_max"]), np.log10(cfg["nu_min"]), cfg["count"])
    )
    if cfg["n_points"]:
        grid = GridSpec1D(cfg["n_points"])
    else:
        probe, capital_u = datum_family(cfg["family"], GridSpec1D(512))
        grid = GridSpec1D(_auto_points(min(nus), float(np.abs(probe.values).max())))
    u0, _ = datum_family(cfg["family"], grid)

    def one(nu: float):
        run_cfg = SolverConfig(nu=float(nu), t_end=cfg["t_end"])
        _, diag = simulate(u0, run_cfg)
        t_star, e_star = sup_enstrophy(diag)
        return float(nu), e_star, t_star

    rows: list[tuple[float, float, float]] = []
    error = ""
    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        futures = [pool.submit(one, nu) for nu in nus]
        for nu, fut in zip(nus, futures):
            try:
                rows.append(fut.result())
            except Exception as exc:
                error = f"run at nu = {nu:g} failed: {exc}"
                break
    if error:
        return None, rows, error
    slope, intercept, residual = fit_power_law([(1.0 / r[0], r[1]) for r in rows])
    arr = np.asarray(rows, dtype=float)
    result = SweepResult(
        param=arr[:, 0],
        e_star=arr[:, 1],
        t_star=arr[:, 2],
        slope=slope,
        intercept=intercept,
        residual=residual,
        c_hat=float(np.min(arr[:, 0] * arr[:, 1])),
        big_c_hat=float(np.max(arr[:, 1] / (1.0 + 1.0 / arr[:, 0]))),
    )
    return result, rows, ""


def _cmd_sweep_nu(cfg: dict, run_dir: Path, jobs: int, seed: int):
    result, rows, error = run_sweep_nu(cfg, jobs)
    if result is None:
        lines = ["param,e_star,t_star"]
        for p, e, t in rows:
            lines.append(f"{float(p)!r},{float(e)!r},{float(t)!r}")
        (run_dir / "sweep.csv").write_text("\n".join(lines) + "\n")
        checks = [
            _assertion("all_sweep_points_ran", False, error),
        ]
        return ["sweep.csv"], checks
    result.to_csv(run_dir / "sweep.csv")
    (run_dir / "summary.json").write_text(
        json.dumps(result.summary(), indent=2) + "\n"
    )
    checks = [
        _assertion("all_sweep_points_ran", True, f"{len(rows)} viscosities"),
        _assertion(
            "lower_constant_positive",
            result.c_hat > 0.0,
            f"c_hat {result.c_hat:.6g}",
        ),
    ]
    return ["sweep.csv", "summary.json"], checks


def run_sweep_e0(cfg: dict, jobs: int, seed: int) -> list[tuple[float, float, float]]:
    """Finite-time sweep rows (e0, best max E(T), best T), pool-parallel."""
    e0s = list(
        np.logspace(
            np.log10(cfg["e0_min"]), np.log10(cfg["e0_max"]), cfg["count"]
        )
    )
    prefactors = [float(tok) for tok in str(cfg["prefactors"]).split(",") if tok]
    grid = GridSpec1D(cfg["n_points"])

    def one(e0: float):
        best, best_t = -np.inf, 0.0
        for p in prefactors:
            horizon = p / np.sqrt(e0)
            opt_cfg = OptimConfig(
                e0=float(e0),
                nu=cfg["nu"],
                T=horizon,
                max_iters=cfg["max_iters"],
                grad_tol=1e-6,
                inner_product="h1",
            )
            for start in default_seeds(grid, float(e0), rng_seed=seed)[
                : cfg["seeds"]
            ]:
                _, objective, _ = finite_time_maximize(opt_cfg, grid, start)
                if objective > best:
                    best, best_t = objective, horizon
        return float(e0), float(best), float(best_t)

    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        return list(pool.map(one, e0s))


def _cmd_sweep_e0(cfg: dict, run_dir: Path, jobs: int, seed: int):
    rows = run_sweep_e0(cfg, jobs, seed)
    lines = ["param,e_star,t_star"]
    for e0, best, horizon in rows:
        lines.append(f"{e0!r},{best!r},{horizon!r}")
    (run_dir / "sweep.csv").write_text("\n".join(lines) + "\n")
    if len(rows) >= 4:
        slope, intercept, residual = fit_power_law([(r[0], r[1]) for r in rows])
    else:
        slope = intercept = residual = None  # too few points for a fit
    summary = {
        "slope": slope,
        "intercept": intercept,
        "residual": residual,
        "nu": cfg["nu"],
    }
    (run_dir / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    checks = [
        _assertion("all_sweep_points_ran", True, f"{len(rows)} enstrophy levels"),
        _assertion(
            "objectives_positive",
            all(r[1] > 0 for r in rows),
            "max E(T) positive on every row",
        ),
    ]
    return ["sweep.csv", "summary.json"], checks


def _cmd_maximize_instant(cfg: dict, run_dir: Path, jobs: int, seed: int):
    grid = GridSpec1D(cfg["n_points"])
    opt_cfg = OptimConfig(
        e0=cfg["e0"],
        nu=cfg["nu"],
        max_iters=cfg["max_iters"],
        grad_tol=cfg["grad_tol"],
        inner_product=cfg["inner_product"],
    )
    optimum, rate, record = instantaneous_maximize(opt_cfg, grid)
    write_field(optimum, run_dir / "optimum.dat")
    record.to_csv(run_dir / "record.csv")
    report = {
        "rate": rate,
        "converged": record.converged,
        "iterations": len(record),
    }
    (run_dir / "report.json").write_text(json.dumps(report, indent=2) + "\n")
    residual = abs(enstrophy(optimum) - cfg["e0"]) / cfg["e0"]
    objective_vals = np.asarray(record.objective)
    checks = [
        _assertion(
            "stays_on_enstrophy_sphere",
            residual <= 1e-8,
            f"relative constraint residual {residual:.2e}",
        ),
        _assertion(
            "ascent_never_decreases",
            bool(np.all(np.diff(objective_vals) >= -1e-12)),
            f"{len(record)} accepted steps",
        ),
    ]
    return ["optimum.dat", "record.csv", "report.json"], checks


def _cmd_maximize_finite(cfg: dict, run_dir: Path, jobs: int, seed: int):
    grid = GridSpec1D(cfg["n_points"])
    opt_cfg = OptimConfig(
        e0=cfg["e0"],
        nu=cfg["nu"],
        T=cfg["horizon"],
        max_iters=cfg["max_iters"],
        grad_tol=cfg["grad_tol"],
        inner_product=cfg["inner_product"],
    )
    starts = default_seeds(grid, cfg["e0"], rng_seed=seed)
    start = starts[cfg["seed_index"] % len(starts)]
    optimum, objective, record = finite_time_maximize(opt_cfg, grid, start)
    write_field(optimum, run_dir / "optimum.dat")
    record.to_csv(run_dir / "record.csv")
    report = {
        "objective": objective,
        "converged": record.converged,
        "iterations": len(record),
    }
    (run_dir / "report.json").write_text(json.dumps(report, indent=2) + "\n")
    residual = abs(enstrophy(optimum) - cfg["e0"]) / cfg["e0"]
    first = float(np.asarray(record.objective)[0])
    checks = [
        _assertion(
            "stays_on_enstrophy_sphere",
            residual <= 1e-8,
            f"relative constraint residual {residual:.2e}",
        ),
        _assertion(
            "never_worse_than_seed",
            objective >= first - 1e-12,
            f"objective {objective:.6g} vs seed {first:.6g}",
        ),
    ]
    return ["optimum.dat", "record.csv", "report.json"], checks


def _cmd_lower_bound(cfg: dict, run_dir: Path, jobs: int, seed: int):
    grid = GridSpec1D(cfg["n_points"])
    spec = LowerBoundDatumSpec(grid=grid, delta_s=cfg["delta_s"])
    u0, capital_u = build_lower_bound_datum(spec)
    write_field(u0, run_dir / "datum.dat")
    profile = Field1D(grid, u0.values / capital_u)
    rows = characteristics_report(profile)
    lines = ["alpha,t_star,t_s,admissible,skipped"]
    for r in rows:
        lines.append(
            f"{float(r.alpha)!r},{float(r.t_star)!r},{float(r.t_s)!r},"
            f"{int(r.admissible)},{int(r.skipped)}"
        )
    (run_dir / "characteristics.csv").write_text("\n".join(lines) + "\n")
    report = {"U": capital_u, "enstrophy": enstrophy(u0)}
    (run_dir / "report.json").write_text(json.dumps(report, indent=2) + "\n")
    checks = [
        _assertion("construction_certified", True, f"U = {capital_u:.6f}"),
        _assertion(
            "characteristics_admissible",
            all(r.admissible for r in rows),
            f"{len(rows)} sampled labels",
        ),
    ]
    return ["datum.dat", "characteristics.csv", "report.json"], checks


def _cmd_dissipation(cfg: dict, run_dir: Path, jobs: int, seed: int):
    if cfg["n_points"]:
        grid = GridSpec1D(cfg["n_points"])
    else:
        probe, _ = datum_family("lower-bound", GridSpec1D(512))
        grid = GridSpec1D(
            _auto_points(cfg["nu"], float(np.abs(probe.values).max()))
        )
    u0, capital_u = datum_family("lower-bound", grid)
    measured, reference = dissipation_window(u0, capital_u, cfg["nu"], cfg["eps"])
    report = {
        "measured": measured,
        "reference": reference,
        "ratio": measured / reference,
    }
    (run_dir / "report.json").write_text(json.dumps(report, indent=2) + "\n")
    checks = [
        _assertion(
            "window_captures_dissipation",
            measured > 0.0,
            f"measured {measured:.6g}, ideal {reference:.6g}",
        )
    ]
    return ["report.json"], checks


def _cmd_conslaw_nd(cfg: dict, run_dir: Path, jobs: int, seed: int):
    grid = GridSpecND(cfg["dim"], cfg["n_points"])
    u0 = nd_initial_datum(cfg["init"], grid)
    flux = get_flux(cfg["flux"])
    sim_cfg = SolverConfig(
        nu=cfg["nu"], t_end=cfg["t_end"], sample_stride=cfg["stride"]
    )
    final, diag = simulate_nd(u0, flux, cfg["nu"], sim_cfg)
    write_field_nd(u0, run_dir / "initial.dat")
    write_field_nd(final, run_dir / "final.dat")
    write_nd_diagnostics_csv(diag, grid, run_dir / "diagnostics.csv")
    checks = _monotone_assertions(diag)
    return ["initial.dat", "final.dat", "diagnostics.csv"], checks


def _cmd_report(cfg: dict, run_dir: Path, jobs: int, seed: int):
    root = run_dir.parent
    entries = []
    for manifest_path in sorted(root.glob("*/manifest.json")):
        if manifest_path.parent == run_dir:
            continue
        data = json.loads(manifest_path.read_text())
        entries.append(
            {
                "run": manifest_path.parent.name,
                "command": data.get("command", "?"),
                "passed": bool(data.get("passed", False)),
                "failed_assertions": [
                    a["name"]
                    for a in data.get("assertions", [])
                    if not a.get("passed", False)
                ],
            }
        )
    (run_dir / "report.json").write_text(json.dumps(entries, indent=2) + "\n")
    for entry in entries:
        status = "pass" if entry["passed"] else "FAIL"
        print(f"{status}  {entry['run']}  ({entry['command']})")
    checks = [
        _assertion(
            "all_recorded_runs_passed",
            all(e["passed"] for e in entries),
            f"{len(entries)} runs scanned",
        )
    ]
    return ["report.json"], checks


_COMMANDS = {
    "simulate": _cmd_simulate,
    "oracle-check": _cmd_oracle_check,
    "heat-estimates": _cmd_heat_estimates,
    "sweep-nu": _cmd_sweep_nu,
    "sweep-e0": _cmd_sweep_e0,
    "maximize-instant": _cmd_maximize_instant,
    "maximize-finite": _cmd_maximize_finite,
    "lower-bound": _cmd_lower_bound,
    "dissipation": _cmd_dissipation,
    "conslaw-nd": _cmd_conslaw_nd,
    "report": _cmd_report,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="enstro",
        description="numerical laboratory for extremal enstrophy growth",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for command, schema in SCHEMAS.items():
        p = sub.add_parser(command, help=f"run the {command} experiment")
        for name, (typ, default, help_text) in {**_COMMON, **schema}.items():
            flag = "--" + name.replace("_", "-")
            p.add_argument(
                flag,
                type=typ,
                default=None,
                help=f"{help_text} (default: {default})",
            )
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    command = args.command
    schema = {**_COMMON, **SCHEMAS[command]}
    resolved = {name: spec[1] for name, spec in schema.items()}
    config_path = getattr(args, "config", None)
    try:
        if config_path:
            resolved.update(load_config(config_path, schema))
        for name in schema:
            cli_value = getattr(args, name, None)
            if cli_value is not None:
                resolved[name] = cli_value
    except (ConfigFileError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    jobs = int(resolved.pop("jobs"))
    seed = int(resolved.pop("seed"))
    resolved.pop("config")
    runs_root = _runs_root(str(resolved.pop("runs_dir")))
    run_dir = _make_run_dir(runs_root, command)
    started = time.strftime("%Y-%m-%dT%H:%M:%S")

    try:
        outputs, assertions = _COMMANDS[command](resolved, run_dir, jobs, seed)
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        _write_manifest(
            run_dir,
            command,
            resolved,
            seed,
            started,
            [],
            [_assertion("run_completed", False, str(exc))],
        )
        return 2
    except Exception as exc:
        _write_manifest(
            run_dir,
            command,
            resolved,
            seed,
            started,
            [],
            [_assertion("run_completed", False, f"{type(exc).__name__}: {exc}")],
        )
        print(f"run failed: {exc}", file=sys.stderr)
        return 1

    _write_manifest(run_dir, command, resolved, seed, started, outputs, assertions)
    ok = all(a["passed"] for a in assertions)
    for a in assertions:
        status = "pass" if a["passed"] else "FAIL"
        print(f"{status}  {a['name']}: {a['detail']}")
    print(f"run directory: {run_dir}")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
