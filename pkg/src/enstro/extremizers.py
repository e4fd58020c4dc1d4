"""Constrained maximization of enstrophy production.

Two ascent problems over the sphere {zero-mean u : E(u) = e0} with
E(u) = int (u_x)^2:

* the instantaneous problem maximizes the production rate
  R(u) = -nu int (u_xx)^2 - (1/2) int (u_x)^3;
* the finite-time problem maximizes E(u(T)) along the viscous Burgers
  flow, with gradients from the exact discrete adjoint of the
  integrating-factor RK4 march.

Ascent is Riemannian: the L2 gradient is preconditioned by the inverse
Laplacian (H1-seminorm metric) by default, projected onto the tangent
space of the constraint sphere, and iterates are retracted back by
amplitude rescaling.  Armijo backtracking keeps the objective monotone
across accepted steps.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from .burgers_solver import (
    _dealias_mask,
    _half_step_factor,
    _nonlinear,
    enstrophy_rate,
    step_spectral,
)
from .field_core import Field1D, GridSpec1D, _rfft_k

_CFL_FLOOR = 1e-12
_FORWARD_CFL = 0.4
ADJOINT_STORAGE_BUDGET_BYTES = 256 * 2**20

RECORD_COLUMNS = ("iter", "objective", "step", "constraint_residual", "grad_norm")


@dataclass(frozen=True)
class OptimConfig:
    """Knobs shared by both sphere-constrained ascent problems."""

    e0: float
    nu: float
    T: float | None = None
    max_iters: int = 200
    step0: float = 0.5
    armijo_factor: float = 0.5
    armijo_decrease: float = 1e-4
    grad_tol: float = 1e-6
    inner_product: str = "h1"

    def __post_init__(self) -> None:
        if self.e0 <= 0:
            raise ValueError(f"e0 must be positive, got {self.e0}")
        if self.nu <= 0:
            raise ValueError(f"nu must be positive, got {self.nu}")
        if self.T is not None and self.T <= 0:
            raise ValueError(f"T must be positive where used, got {self.T}")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if self.step0 <= 0:
            raise ValueError("step0 must be positive")
        if not 0.0 < self.armijo_factor < 1.0:
            raise ValueError("armijo_factor must lie in (0, 1)")
        if not 0.0 < self.armijo_decrease < 1.0:
            raise ValueError("armijo_decrease must lie in (0, 1)")
        if self.inner_product not in ("l2", "h1"):
            raise ValueError(
                f"inner_product must be 'l2' or 'h1', got {self.inner_product!r}"
            )


@dataclass(frozen=True, eq=False)
class OptimRecord:
    """Per-accepted-iteration ascent history plus a convergence flag."""

    objective: np.ndarray
    step: np.ndarray
    constraint_residual: np.ndarray
    grad_norm: np.ndarray
    converged: bool

    def __post_init__(self) -> None:
        n = len(self.objective)
        for name in ("objective", "step", "constraint_residual", "grad_norm"):
            arr = np.asarray(getattr(self, name), dtype=float).copy()
            if arr.shape != (n,):
                raise ValueError(f"column {name!r} has inconsistent length")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def __len__(self) -> int:
        return len(self.objective)

    def to_csv(self, path: str | Path) -> None:
        lines = [",".join(RECORD_COLUMNS)]
        for i in range(len(self)):
            lines.append(
                f"{i},{float(self.objective[i])!r},{float(self.step[i])!r},"
                f"{float(self.constraint_residual[i])!r},{float(self.grad_norm[i])!r}"
            )
        Path(path).write_text("\n".join(lines) + "\n")


# ----------------------------------------------------------------------
# instantaneous problem: functional and its exact discrete gradient
# ----------------------------------------------------------------------


def rate_functional(u: Field1D, nu: float) -> float:
    """R(u) = -nu int (u_xx)^2 - (1/2) int (u_x)^3 on the grid."""
    return enstrophy_rate(u, nu).total


def rate_gradient(u: Field1D, nu: float) -> Field1D:
    """Exact L2 gradient of the discrete rate functional.

    delta R / delta u = -2 nu d_x^4 u + (3/2) d_x((u_x)^2); because the
    discrete functional uses the spectral derivative matrix, this formula
    with pointwise squaring is its exact gradient (the derivative matrix
    is anti-self-adjoint), so finite differences match to roundoff.
    """
    if nu <= 0:
        raise ValueError(f"nu must be positive, got {nu}")
    n = u.grid.n_points
    k = _rfft_k(n)
    uh = np.fft.rfft(u.values)
    ux = np.fft.irfft(2j * np.pi * k * uh, n)
    fourth = np.fft.irfft((2.0 * np.pi * k) ** 4 * uh, n)
    dsq = np.fft.irfft(2j * np.pi * k * np.fft.rfft(ux**2), n)
    return Field1D(u.grid, -2.0 * nu * fourth + 1.5 * dsq)


# ----------------------------------------------------------------------
# sphere geometry
# ----------------------------------------------------------------------


def _enstrophy_vals(vals: np.ndarray, n: int, dx: float) -> float:
    k = _rfft_k(n)
    ux = np.fft.irfft(2j * np.pi * k * np.fft.rfft(vals), n)
    return float(np.sum(ux**2) * dx)


def _retract(vals: np.ndarray, e0: float, n: int, dx: float) -> np.ndarray:
    e = _enstrophy_vals(vals, n, dx)
    if e <= 0:
        raise ValueError("cannot retract a field with zero enstrophy")
    return vals * np.sqrt(e0 / e)


def _precondition(g_vals: np.ndarray, n: int, inner_product: str) -> np.ndarray:
    if inner_product == "l2":
        return g_vals - g_vals.mean()
    k = _rfft_k(n)
    gh = np.fft.rfft(g_vals)
    with np.errstate(divide="ignore", invalid="ignore"):
        gh = np.where(k > 0, gh / np.where(k > 0, (2.0 * np.pi * k) ** 2, 1.0), 0.0)
    return np.fft.irfft(gh, n)


def _tangent_direction(
    u_vals: np.ndarray, g_vals: np.ndarray, n: int, dx: float, inner_product: str
) -> tuple[np.ndarray, float, float]:
    """Preconditioned gradient projected tangent to {E = const}.

    Returns (direction, slope, metric_norm) where slope = <g_L2, d>_L2 is
    the directional derivative along d (nonnegative by construction) and
    metric_norm measures d in the preconditioning inner product.
    """
    k = _rfft_k(n)
    uh = np.fft.rfft(u_vals)
    c_vals = np.fft.irfft(-((2.0 * np.pi * k) ** 2) * uh, n) * (-2.0)  # dE/du
    pg = _precondition(g_vals, n, inner_product)
    pc = _precondition(c_vals, n, inner_product)
    denom = float(np.sum(pc * c_vals) * dx)
    if abs(denom) < 1e-300:
        d = pg
    else:
        coef = float(np.sum(pg * c_vals) * dx) / denom
        d = pg - coef * pc
    slope = float(np.sum(g_vals * d) * dx)
    if inner_product == "h1":
        dh = np.fft.rfft(d)
        dd = np.fft.irfft(2j * np.pi * k * dh, n)
        metric_norm = float(np.sqrt(np.sum(dd**2) * dx))
    else:
        metric_norm = float(np.sqrt(np.sum(d**2) * dx))
    return d, slope, metric_norm


def _ascend(
    start_vals: np.ndarray,
    grid: GridSpec1D,
    cfg: OptimConfig,
    objective: Callable[[np.ndarray], float],
    gradient: Callable[[np.ndarray], np.ndarray],
) -> tuple[np.ndarray, float, OptimRecord]:
    """Riemannian Armijo ascent on the enstrophy sphere {E = cfg.e0}."""
    n, dx = grid.n_points, grid.dx
    u = _retract(start_vals - start_vals.mean(), cfg.e0, n, dx)
    j = objective(u)
    rows = [(j, 0.0, abs(_enstrophy_vals(u, n, dx) - cfg.e0) / cfg.e0, np.nan)]
    eta = cfg.step0
    norm0 = None
    converged = False
    for _ in range(cfg.max_iters):
        g = gradient(u)
        d, slope, gnorm = _tangent_direction(u, g, n, dx, cfg.inner_product)
        if norm0 is None:
            norm0 = max(gnorm, 1e-300)
        if gnorm <= cfg.grad_tol * norm0:
            converged = True
            break
        accepted = False
        while eta * gnorm > 1e-16 * max(1.0, np.sqrt(cfg.e0)):
            trial = _retract(u + eta * d, cfg.e0, n, dx)
            j_trial = objective(trial)
            if j_trial >= j + cfg.armijo_decrease * eta * slope:
                accepted = True
                break
            eta *= cfg.armijo_factor
        if not accepted:
            break  # no ascent direction survives backtracking: stationary
        u, j = trial, j_trial
        resid = abs(_enstrophy_vals(u, n, dx) - cfg.e0) / cfg.e0
        rows.append((j, eta, resid, gnorm))
        eta = min(eta / cfg.armijo_factor, 64.0 * cfg.step0)
    cols = np.asarray(rows, dtype=float)
    record = OptimRecord(cols[:, 0], cols[:, 1], cols[:, 2], cols[:, 3], converged)
    return u, j, record


def default_seeds(
    grid: GridSpec1D, e0: float, count: int = 5, rng_seed: int = 2025
) -> list[Field1D]:
    """Low modes plus seeded band-limited perturbations, all on {E = e0}."""
    if count < 1:
        raise ValueError("count must be at least 1")
    n, dx, x = grid.n_points, grid.dx, grid.x
    rng = np.random.default_rng(rng_seed)
    raw = [
        np.sin(2.0 * np.pi * x),
        np.sin(4.0 * np.pi * x),
        np.sin(2.0 * np.pi * x) + 0.5 * np.sin(4.0 * np.pi * x) + 0.25 * np.sin(6.0 * np.pi * x),
    ]
    while len(raw) < count:
        v = np.zeros(n)
        for k in range(1, 7):
            v += rng.normal() / k * np.sin(2.0 * np.pi * k * x)
            v += rng.normal() / k * np.cos(2.0 * np.pi * k * x)
        raw.append(v)
    out = []
    for v in raw[:count]:
        out.append(Field1D(grid, _retract(v - v.mean(), e0, n, dx)))
    return out


def instantaneous_maximize(
    cfg: OptimConfig, grid: GridSpec1D
) -> tuple[Field1D, float, OptimRecord]:
    """Maximize the production rate R over the sphere, best of multi-start."""
    best = None
    for seed in default_seeds(grid, cfg.e0):
        u, j, record = _ascend(
            seed.values,
            grid,
            cfg,
            objective=lambda v: rate_functional(Field1D(grid, v), cfg.nu),
            gradient=lambda v: rate_gradient(Field1D(grid, v), cfg.nu).values,
        )
        if best is None or j > best[1]:
            best = (u, j, record)
    u, j, record = best
    return Field1D(grid, u), j, record


# ----------------------------------------------------------------------
# finite-time problem: forward march, discrete adjoint, ascent
# ----------------------------------------------------------------------


def _march_forward(
    u0_vals: np.ndarray,
    T: float,
    nu: float,
    n: int,
    dx: float,
    keep: bool,
    budget_bytes: int,
) -> tuple[np.ndarray, list[float], dict[int, np.ndarray], int]:
    """March to time T; optionally retain a checkpoint map of spectra.

    Checkpoints start dense (every step) and are thinned by doubling the
    stride whenever their storage would exceed ``budget_bytes``; the step
    list is always kept in full so segments can be re-marched exactly.
    """
    uh = np.fft.rfft(u0_vals)
    bytes_per = uh.nbytes
    dts: list[float] = []
    checkpoints: dict[int, np.ndarray] = {0: uh.copy()} if keep else {}
    stride = 1
    t = 0.0
    i = 0
    while t < T:
        amp = max(float(np.abs(np.fft.irfft(uh, n)).max()), _CFL_FLOOR)
        dt = _FORWARD_CFL * dx / amp
        last = dt >= T - t
        if last:
            dt = T - t
        uh = step_spectral(uh, dt, nu, n, dealias=True)
        if not np.all(np.isfinite(np.fft.irfft(uh, n))):
            raise FloatingPointError(f"forward march lost finiteness at t={t:.6g}")
        dts.append(dt)
        t = T if last else t + dt
        i += 1
        if keep:
            if i % stride == 0:
                checkpoints[i] = uh.copy()
            if len(checkpoints) * bytes_per > budget_bytes:
                stride *= 2
                checkpoints = {j: v for j, v in checkpoints.items() if j % stride == 0}
    return uh, dts, checkpoints, stride


def _nonlinear_adjoint(a_hat: np.ndarray, v_hat: np.ndarray, n: int, mask: np.ndarray) -> np.ndarray:
    """Transpose of the linearized dealiased advection about state a."""
    k = _rfft_k(n)
    da = np.fft.irfft(2j * np.pi * k * a_hat, n)
    a = np.fft.irfft(a_hat, n)
    mv = np.fft.irfft(mask * v_hat, n)
    return -np.fft.rfft(da * mv) + 2j * np.pi * k * np.fft.rfft(a * mv)


def _adjoint_step(
    uh: np.ndarray, lam_hat: np.ndarray, dt: float, nu: float, n: int
) -> np.ndarray:
    """Pull the objective gradient back through one forward RK4 step."""
    mask = _dealias_mask(n, True)
    e1 = _half_step_factor(n, dt, nu)
    e2 = e1 * e1
    # recompute the forward stage states from the stored step-start state
    k1 = dt * _nonlinear(uh, n, mask)
    u2 = e1 * (uh + 0.5 * k1)
    k2 = dt * _nonlinear(u2, n, mask)
    u3 = e1 * uh + 0.5 * k2
    k3 = dt * _nonlinear(u3, n, mask)
    u4 = e2 * uh + e1 * k3

    w = lam_hat.copy()
    w[0] = 0.0  # transpose of the mean projection
    l_k1 = (dt / 6.0) * (e2 * w)
    l_k2 = (dt / 3.0) * (e1 * w)
    l_k3 = (dt / 3.0) * (e1 * w)
    l_k4 = (dt / 6.0) * w
    l_u = e2 * w

    v4 = _nonlinear_adjoint(u4, l_k4, n, mask)
    l_u += e2 * v4
    l_k3 += dt * (e1 * v4)

    v3 = _nonlinear_adjoint(u3, l_k3, n, mask)
    l_u += e1 * v3
    l_k2 += 0.5 * dt * v3

    v2 = _nonlinear_adjoint(u2, l_k2, n, mask)
    l_u += e1 * v2
    l_k1 += 0.5 * dt * (e1 * v2)

    l_u += _nonlinear_adjoint(uh, l_k1, n, mask)
    return l_u


def finite_time_objective(u0: Field1D, T: float, nu: float) -> float:
    """E(u(T)) for the discrete forward march started at u0."""
    if T < 0:
        raise ValueError(f"T must be nonnegative, got {T}")
    if nu <= 0:
        raise ValueError(f"nu must be positive, got {nu}")
    n, dx = u0.grid.n_points, u0.grid.dx
    if T == 0:
        return _enstrophy_vals(u0.values, n, dx)
    uh, _, _, _ = _march_forward(u0.values, T, nu, n, dx, False, 0)
    k = _rfft_k(n)
    ux = np.fft.irfft(2j * np.pi * k * uh, n)
    return float(np.sum(ux**2) * dx)


def finite_time_gradient(
    u0: Field1D,
    T: float,
    nu: float,
    budget_bytes: int = ADJOINT_STORAGE_BUDGET_BYTES,
) -> Field1D:
    """Exact L2 gradient of u0 -> E(u(T)) via the discrete adjoint.

    The backward pass transposes, step by step, exactly the arithmetic of
    the forward march (stages recomputed from checkpointed step-start
    states), so central finite differences of the discrete objective match
    the result to roundoff-limited accuracy.
    """
    if T <= 0:
        raise ValueError(f"T must be positive, got {T}")
    if nu <= 0:
        raise ValueError(f"nu must be positive, got {nu}")
    n, dx = u0.grid.n_points, u0.grid.dx
    if abs(float(u0.values.mean())) > 1e-12:
        raise ValueError("initial data must have zero mean")
    uh_T, dts, checkpoints, stride = _march_forward(
        u0.values, T, nu, n, dx, True, budget_bytes
    )
    n_steps = len(dts)
    k = _rfft_k(n)
    # terminal condition: L2 gradient of E at u(T) is -2 u_xx(T)
    lam = 2.0 * ((2.0 * np.pi * k) ** 2) * uh_T

    # walk segments backward, re-marching each from its checkpoint
    seg_hi = n_steps  # states are indexed 0..n_steps; step i maps i -> i+1
    while seg_hi > 0:
        seg_lo = max(0, ((seg_hi - 1) // stride) * stride)
        states = {seg_lo: checkpoints[seg_lo]}
        uh = checkpoints[seg_lo]
        for j in range(seg_lo, seg_hi - 1):
            uh = step_spectral(uh, dts[j], nu, n, dealias=True)
            states[j + 1] = uh
        for j in range(seg_hi - 1, seg_lo - 1, -1):
            lam = _adjoint_step(states[j], lam, dts[j], nu, n)
        seg_hi = seg_lo
    lam[0] = 0.0
    return Field1D(u0.grid, np.fft.irfft(lam, n))


def finite_time_maximize(
    cfg: OptimConfig, grid: GridSpec1D, seed: Field1D
) -> tuple[Field1D, float, OptimRecord]:
    """Maximize E(u(T)) over the sphere {E(u0) = e0} from one seed."""
    if cfg.T is None:
        raise ValueError("finite_time_maximize needs cfg.T")
    if float(np.abs(seed.values).max()) == 0.0:
        raise ValueError("seed must be nonzero")
    u, j, record = _ascend(
        seed.values,
        grid,
        cfg,
        objective=lambda v: finite_time_objective(Field1D(grid, v), cfg.T, cfg.nu),
        gradient=lambda v: finite_time_gradient(Field1D(grid, v), cfg.T, cfg.nu).values,
    )
    return Field1D(grid, u), j, record
