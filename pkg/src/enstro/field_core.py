"""Periodic scalar fields on the unit circle and their spectral calculus.

Everything downstream (solvers, oracles, optimizers) speaks in terms of the
types defined here: a power-of-two grid on [0, 1), real sample vectors, and
normalized Fourier coefficients.  Quadrature is the trapezoid rule, which is
exact for band-limited integrands on a periodic grid, so the discrete L2
pairing ``dx * sum(a*b)`` is the inner product used everywhere.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache

import numpy as np


class ConfigurationError(ValueError):
    """Raised for invalid grid or solver configuration values."""


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class GridSpec1D:
    """Uniform periodic grid: ``n_points`` samples at x_j = j/n on [0, 1).

    The domain length is fixed at 1; generalized boxes live in the
    finite-volume module, not here.
    """

    n_points: int
    length: float = 1.0

    def __post_init__(self) -> None:
        if not isinstance(self.n_points, (int, np.integer)):
            raise ConfigurationError("n_points must be an integer")
        if self.n_points < 8 or not _is_power_of_two(int(self.n_points)):
            raise ConfigurationError(
                f"n_points must be a power of two >= 8, got {self.n_points}"
            )
        if self.length != 1.0:
            raise ConfigurationError("1-D grids have unit length")

    @property
    def dx(self) -> float:
        return self.length / self.n_points

    @property
    def x(self) -> np.ndarray:
        """Sample locations x_j = j * dx."""
        return np.arange(self.n_points) * self.dx


@dataclass(frozen=True, eq=False)
class Field1D:
    """Real scalar samples on a :class:`GridSpec1D`.  Immutable value type."""

    grid: GridSpec1D
    values: np.ndarray

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (self.grid.n_points,):
            raise ValueError(
                f"values shape {vals.shape} does not match grid "
                f"({self.grid.n_points},)"
            )
        vals = vals.copy()
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)


@dataclass(frozen=True, eq=False)
class Spectrum1D:
    """Fourier coefficients c_k of a field, k in [-N/2, N/2) (FFT layout).

    Coefficients are normalized so that u(x) = sum_k c_k exp(2*pi*i*k*x);
    for real fields they satisfy c_{-k} = conj(c_k).
    """

    grid: GridSpec1D
    coeffs: np.ndarray

    def __post_init__(self) -> None:
        co = np.asarray(self.coeffs, dtype=complex)
        if co.shape != (self.grid.n_points,):
            raise ValueError(
                f"coeffs shape {co.shape} does not match grid "
                f"({self.grid.n_points},)"
            )
        co = co.copy()
        co.setflags(write=False)
        object.__setattr__(self, "coeffs", co)


@dataclass(frozen=True)
class FieldNorms:
    """Summary functionals of a field; ``enstrophy`` is ||u_x||_{L2}^2."""

    l2: float
    linf: float
    tv: float
    mean: float
    enstrophy: float


@lru_cache(maxsize=32)
def _fft_k(n: int) -> np.ndarray:
    """Integer wavenumbers in numpy FFT order for an n-point grid."""
    return np.fft.fftfreq(n, d=1.0 / n)


@lru_cache(maxsize=32)
def _rfft_k(n: int) -> np.ndarray:
    """Nonnegative integer wavenumbers for the rfft layout (0 .. n/2)."""
    return np.fft.rfftfreq(n, d=1.0 / n)


def transform(field: Field1D) -> Spectrum1D:
    """Forward FFT with 1/N normalization, so coeffs are Fourier coefficients."""
    n = field.grid.n_points
    return Spectrum1D(field.grid, np.fft.fft(field.values) / n)


def inverse(spectrum: Spectrum1D) -> Field1D:
    """Inverse of :func:`transform`; discards the O(roundoff) imaginary part."""
    n = spectrum.grid.n_points
    vals = np.fft.ifft(spectrum.coeffs * n)
    return Field1D(spectrum.grid, vals.real)


def is_hermitian(spectrum: Spectrum1D, tol: float = 1e-12) -> bool:
    """True when the coefficients are conjugate-symmetric (real field)."""
    c = spectrum.coeffs
    n = c.size
    sym = np.conj(c[(-np.arange(n)) % n])
    scale = max(float(np.abs(c).max()), 1.0)
    return bool(np.abs(c - sym).max() <= tol * scale)


def derivative(field: Field1D, order: int = 1) -> Field1D:
    """Spectral derivative of the given order (1 or 2).

    Multiplies mode k by (2*pi*i*k)**order; for odd orders the unpaired
    Nyquist mode is dropped, the standard choice that keeps the result real
    and the operator skew-adjoint on the sample inner product.
    """
    if order not in (1, 2):
        raise ValueError(f"derivative order must be 1 or 2, got {order}")
    n = field.grid.n_points
    k = _rfft_k(n)
    c = np.fft.rfft(field.values)
    c = c * (2j * np.pi * k) ** order
    if order % 2 == 1:
        c[-1] = 0.0
    return Field1D(field.grid, np.fft.irfft(c, n))


def heat_propagate(field: Field1D, nu_t: float) -> Field1D:
    """Apply the periodic heat semigroup: mode k is damped by exp(-nu_t*(2*pi*k)**2).

    The argument is the *product* of diffusivity and elapsed time, so the
    semigroup property reads ``heat(heat(u, a), b) == heat(u, a + b)``.
    """
    if nu_t < 0:
        raise ValueError(f"nu_t must be nonnegative, got {nu_t}")
    if nu_t == 0:
        return Field1D(field.grid, field.values)
    n = field.grid.n_points
    k = _rfft_k(n)
    c = np.fft.rfft(field.values) * np.exp(-nu_t * (2.0 * np.pi * k) ** 2)
    return Field1D(field.grid, np.fft.irfft(c, n))


def norms(field: Field1D) -> FieldNorms:
    """Compute the standard summary norms in one pass.

    ``tv`` is the wrap-around total variation sum |u_{j+1} - u_j|; the
    enstrophy uses the spectral derivative and trapezoid quadrature.
    """
    v = field.values
    dx = field.grid.dx
    ux = derivative(field, 1).values
    return FieldNorms(
        l2=float(np.sqrt(np.sum(v * v) * dx)),
        linf=float(np.abs(v).max()),
        tv=float(np.abs(np.diff(v, append=v[:1])).sum()),
        mean=float(v.mean()),
        enstrophy=float(np.sum(ux * ux) * dx),
    )


def enstrophy(field: Field1D) -> float:
    """Shortcut for ``norms(field).enstrophy``."""
    ux = derivative(field, 1).values
    return float(np.sum(ux * ux) * field.grid.dx)


def rescale(field: Field1D, lam: float) -> Field1D:
    """Amplitude rescaling u -> lam * u (lam > 0).

    Under the companion time rescaling t -> lam*t this maps solutions with
    viscosity nu to solutions with viscosity lam*nu, trading initial
    enstrophy for inverse viscosity at fixed nu*E.
    """
    if lam <= 0:
        raise ValueError(f"rescale factor must be positive, got {lam}")
    return Field1D(field.grid, lam * field.values)


def mean_zero(field: Field1D) -> Field1D:
    """Project out the spatial mean."""
    return Field1D(field.grid, field.values - field.values.mean())


def sample(grid: GridSpec1D, fn) -> Field1D:
    """Sample a callable f(x) on the grid."""
    return Field1D(grid, np.asarray(fn(grid.x), dtype=float))


_HEADER_RE = re.compile(r"^N=(\d+) L=([0-9eE+.\-]+)$")


def write_field(field: Field1D, path) -> None:
    """Plain-text dump: ``N=<n> L=<length>`` header, one sample per line."""
    lines = [f"N={field.grid.n_points} L={field.grid.length}"]
    lines.extend(repr(float(v)) for v in field.values)
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_field(path) -> Field1D:
    """Inverse of :func:`write_field`."""
    with open(path) as fh:
        header = fh.readline().strip()
        m = _HEADER_RE.match(header)
        if m is None:
            raise ValueError(f"bad field header: {header!r}")
        n = int(m.group(1))
        length = float(m.group(2))
        vals = np.array([float(line) for line in fh if line.strip()])
    if vals.size != n:
        raise ValueError(f"expected {n} samples, found {vals.size}")
    if length != 1.0:
        raise ValueError(f"1-D fields have unit length, file says {length}")
    return Field1D(GridSpec1D(n), vals)
