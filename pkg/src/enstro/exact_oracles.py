"""Closed-form references the solvers are tested against.

Three independent sources of truth live here:

* the logarithmic-potential transformation of the viscous Burgers equation,
  which turns it into the heat equation and yields machine-accurate
  solutions for arbitrary smooth zero-mean data;
* the stationary viscous shock ``u = -U tanh(x/l)`` with ``l = nu/U``,
  whose whole-line enstrophy ``(4/3) U**3 / nu`` anchors the ``1/nu``
  scaling of extremal enstrophy;
* smoothing estimates for the heat semigroup, packaged as dimensionless
  ratios that must stay bounded as data and times vary.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .field_core import Field1D, GridSpec1D, _rfft_k, heat_propagate


class UnderflowError(ArithmeticError):
    """Potential too deep for float64: increase nu or decrease t."""


@dataclass(frozen=True)
class ShockProfile:
    """Stationary viscous shock ``u(x) = -U tanh(x / (nu/U))`` on the line."""

    U: float
    nu: float

    def __post_init__(self) -> None:
        if self.U <= 0 or self.nu <= 0:
            raise ValueError("shock profile needs U > 0 and nu > 0")

    @property
    def width(self) -> float:
        return self.nu / self.U

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return -self.U * np.tanh(np.asarray(x) / self.width)


def shock_enstrophy(U: float, nu: float) -> float:
    """Whole-line enstrophy of :class:`ShockProfile`.

    With u_x = -(U/l) sech^2(x/l) and integral of sech^4 equal to 4/3,
    the enstrophy is (U/l)^2 * l * 4/3 = (4/3) U^3 / nu.
    """
    if U <= 0 or nu <= 0:
        raise ValueError("shock_enstrophy needs U > 0 and nu > 0")
    return (4.0 / 3.0) * U**3 / nu


def hopf_cole_solution(u0: Field1D, nu: float, t: float) -> Field1D:
    """Exact periodic Burgers solution via the logarithmic substitution.

    Writes u = -2 nu (log theta)_x where theta obeys the heat equation.
    The initial potential is shifted by its minimum before exponentiation
    so the largest value of theta0 is exactly 1; this pushes the available
    float64 range entirely toward small values of theta.
    """
    if nu <= 0:
        raise ValueError(f"nu must be positive, got {nu}")
    if t < 0:
        raise ValueError(f"t must be nonnegative, got {t}")
    n = u0.grid.n_points
    if abs(u0.values.mean()) > 1e-12:
        raise ValueError("initial data must have zero mean")

    k = _rfft_k(n)
    uh = np.fft.rfft(u0.values)
    with np.errstate(divide="ignore", invalid="ignore"):
        ph = np.where(k > 0, uh / np.where(k > 0, 2j * np.pi * k, 1.0), 0.0)
    ph[-1] = 0.0
    phi = np.fft.irfft(ph, n)

    theta0 = np.exp(-(phi - phi.min()) / (2.0 * nu))
    if theta0.min() < 1e-300:
        raise UnderflowError(
            "potential range exceeds float64 after exp(); "
            "increase nu or reduce the data amplitude"
        )
    theta = heat_propagate(Field1D(u0.grid, theta0), nu * t)
    tv = theta.values
    if tv.min() < 1e-300:
        raise UnderflowError(
            "heat-propagated potential underflowed; increase nu or reduce t"
        )
    th = np.fft.rfft(tv)
    theta_x = np.fft.irfft(2j * np.pi * k * th, n)
    return Field1D(u0.grid, -2.0 * nu * theta_x / tv)


def heat_estimate_ratios(v0: Field1D, nu: float, t: float) -> tuple[float, float]:
    """Dimensionless smoothing ratios of the heat semigroup.

    r1 = ||d_x e^{nu t D} v0||_L2 * (nu t)^{1/4} / (||v0||_inf^{1/2} ||d_x v0||_L1^{1/2})
    r2 = ||d_x^2 e^{nu t D} v0||_L2 * (nu t)^{3/4} / (same denominator)

    Both stay bounded by an absolute constant over all nonconstant data and
    all positive times; they degenerate for constant data.
    """
    if nu <= 0 or t <= 0:
        raise ValueError("heat_estimate_ratios needs nu > 0 and t > 0")
    n = v0.grid.n_points
    dx = v0.grid.dx
    k = _rfft_k(n)
    vh = np.fft.rfft(v0.values)
    v_x = np.fft.irfft(2j * np.pi * k * vh, n)
    grad_l1 = float(np.abs(v_x).sum() * dx)
    sup = float(np.abs(v0.values).max())
    if grad_l1 < 1e-14:
        raise ValueError("degenerate input: v0 is constant")

    damp = np.exp(-nu * t * (2.0 * np.pi * k) ** 2)
    wh = vh * damp
    w_x = np.fft.irfft(2j * np.pi * k * wh, n)
    w_xx = np.fft.irfft(-((2.0 * np.pi * k) ** 2) * wh, n)
    l2_1 = float(np.sqrt(np.sum(w_x**2) * dx))
    l2_2 = float(np.sqrt(np.sum(w_xx**2) * dx))

    denom = np.sqrt(sup) * np.sqrt(grad_l1)
    r1 = l2_1 * (nu * t) ** 0.25 / denom
    r2 = l2_2 * (nu * t) ** 0.75 / denom
    return r1, r2


def gronwall_envelope(e0: float, lip: float, nu: float, t: float) -> float:
    """Short-time enstrophy envelope E(t) <= E(0) * exp(lip^2 * t / nu).

    ``lip`` is the Lipschitz constant of the flux derivative on the range of
    the data (1 for the quadratic flux on [-1, 1]).
    """
    if e0 < 0 or lip < 0 or nu <= 0 or t < 0:
        raise ValueError("gronwall_envelope needs e0, lip, t >= 0 and nu > 0")
    return e0 * np.exp(lip**2 * t / nu)


def make_grid(n: int) -> GridSpec1D:
    """Convenience constructor used by scripts and tests."""
    return GridSpec1D(n)
