"""Tapered finite Fourier transform and periodogram on frequency grids.

The tapered transform of a path Y(-T)..Y(T) is

    d_T(lam) = sum_{t=-T}^{T} exp(-i*lam*t) h(t/T) Y(t)

and the tapered periodogram is I_T(lam) = |d_T(lam)|^2 / (2*pi*H_{2,T}(0)).
Frequencies live on Lambda = (-pi, pi].  Two grid layouts are supported:
a uniform grid lam_j = -pi + 2*pi*j/N (j = 1..N, the quadrature default)
and the Fourier frequencies 2*pi*m/(2T+1) (m = -T..T), where the transform
reduces to a single FFT.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .tapers import DegenerateTaperError, Taper, taper_series
from .models import SamplePath, TWO_PI


@dataclass(frozen=True)
class FrequencyGrid:
    """Equal-weight frequency grid on (-pi, pi]; weight 2*pi/N per point."""

    N: int
    points: np.ndarray
    kind: str = "uniform"

    @property
    def weight(self) -> float:
        return TWO_PI / self.N

    def __post_init__(self):
        p = self.points
        if len(p) != self.N:
            raise ValueError("points length must equal N")
        if np.any(np.diff(p) <= 0):
            raise ValueError("grid points must be strictly increasing")
        if p[0] <= -np.pi or p[-1] > np.pi:
            raise ValueError("grid points must lie in (-pi, pi]")


def uniform_grid(N: int) -> FrequencyGrid:
    """lam_j = -pi + 2*pi*j/N for j = 1..N."""
    if N < 1:
        raise ValueError("N must be >= 1")
    j = np.arange(1, N + 1, dtype=float)
    # j/N first: the last ratio is exactly 1.0, so the last point is
    # exactly pi (2*pi - pi is exact) instead of overshooting by one ulp.
    return FrequencyGrid(N=N, points=-np.pi + TWO_PI * (j / N), kind="uniform")


def fourier_grid(T: int) -> FrequencyGrid:
    """The 2T+1 Fourier frequencies 2*pi*m/(2T+1), m = -T..T."""
    n = 2 * T + 1
    m = np.arange(-T, T + 1, dtype=float)
    return FrequencyGrid(N=n, points=TWO_PI * m / n, kind="fourier")


def default_grid(T: int) -> FrequencyGrid:
    """Default quadrature grid: N = 2*(2T+1) uniform points.

    Denser than the Fourier frequencies so that Riemann quadrature error
    in the functionals stays below statistical error for powers up to 4.
    """
    return uniform_grid(2 * (2 * T + 1))


@dataclass(frozen=True)
class PeriodogramGrid:
    """d_T and I_T evaluated on a grid, with provenance references."""

    grid: FrequencyGrid
    d: np.ndarray
    I: np.ndarray
    T: int
    taper: Taper


def fourier_transform(path: SamplePath, taper: Taper, lam) -> complex:
    """d_T(lam) by direct summation; conjugate-symmetric in lam for real data."""
    h = taper_series(taper, path.T)
    t = np.arange(-path.T, path.T + 1, dtype=float)
    lam = np.asarray(lam, dtype=float)
    phases = np.exp(-1j * np.multiply.outer(lam, t))
    out = phases @ (h * path.values)
    return complex(out) if out.ndim == 0 else out


def _dft_fourier_frequencies(x: np.ndarray, T: int) -> np.ndarray:
    """d at the Fourier frequencies m = -T..T via one FFT.

    x is indexed t = -T..T; rolling it so index 0 holds t = 0 turns the
    sum over t in [-T, T] into a plain DFT of length n = 2T+1.
    """
    n = 2 * T + 1
    z = np.concatenate([x[T:], x[:T]])
    F = np.fft.fft(z)
    return np.concatenate([F[n - T:], F[: T + 1]])


def periodogram_grid(path: SamplePath, taper: Taper,
                     grid: FrequencyGrid) -> PeriodogramGrid:
    """Evaluate d_T and I_T on the grid.

    Uses the FFT when the grid is exactly the 2T+1 Fourier frequencies,
    direct summation otherwise; the two paths agree to rounding.
    """
    T = path.T
    h = taper_series(taper, T)
    h2 = float(h @ h)
    if h2 == 0.0:
        raise DegenerateTaperError("H_{2,T}(0) = 0; periodogram undefined")
    x = h * path.values
    if grid.kind == "fourier" and grid.N == 2 * T + 1:
        d = _dft_fourier_frequencies(x, T)
    else:
        t = np.arange(-T, T + 1, dtype=float)
        d = np.exp(-1j * np.multiply.outer(grid.points, t)) @ x
    I = (d.real**2 + d.imag**2) / (TWO_PI * h2)
    return PeriodogramGrid(grid=grid, d=d, I=I, T=T, taper=taper)


def power(grid_values: PeriodogramGrid, k: int) -> np.ndarray:
    """Pointwise k-th power of the periodogram, k >= 1."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return grid_values.I**k
