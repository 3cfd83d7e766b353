"""Data tapers and taper-derived normalization constants.

A taper is a weight function h on the real line that is even, nonnegative,
of bounded variation, and supported on [-1, 1].  Observations Y(t),
t = -T..T, are weighted by h(t/T) before Fourier transforming; every
normalization downstream is driven by the discrete norms

    H_{k,T}(lam) = sum_{t=-T}^{T} h(t/T)^k * exp(-i*lam*t)

and by the continuous moments H_k = integral of h^k over [-1, 1].  The
variance-inflation factor

    e(h) = H_4 / H_2^2

is the taper's entire contribution to the limiting covariance of
periodogram functionals: 1/2 for the rectangular taper, 3/4 for the
cosine bell, 9/10 for the triangular (bartlett) taper.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import simpson


class DegenerateTaperError(ValueError):
    """Raised when a taper has vanishing L2 mass (H_{2,T}(0) = 0)."""


@dataclass(frozen=True)
class Taper:
    """A taper h: even, nonnegative, supported on [-1, 1].

    ``evaluate`` must accept a float array and return h elementwise;
    it is expected to vanish outside [-1, 1].
    """

    kind: str
    evaluate: Callable[[np.ndarray], np.ndarray]
    support_halfwidth: float = 1.0

    def __call__(self, t):
        return self.evaluate(np.asarray(t, dtype=float))


def _rectangular(t):
    return np.where(np.abs(t) <= 1.0, 1.0, 0.0)


def _cosine(t):
    # clip keeps the cosine argument inside [-pi/2, pi/2]; the mask
    # zeroes everything outside the support anyway
    inside = np.abs(t) <= 1.0
    return np.where(inside, np.cos(0.5 * np.pi * np.clip(t, -1.0, 1.0)), 0.0)


def _bartlett(t):
    return np.maximum(1.0 - np.abs(t), 0.0)


RECTANGULAR = Taper("rectangular", _rectangular)
COSINE = Taper("cosine", _cosine)
BARTLETT = Taper("bartlett", _bartlett)

BUILTIN_TAPERS = {
    "rectangular": RECTANGULAR,
    "cosine": COSINE,
    "bartlett": BARTLETT,
}


def get_taper(name: str) -> Taper:
    """Look up a built-in taper by name."""
    try:
        return BUILTIN_TAPERS[name]
    except KeyError:
        raise ValueError(
            f"unknown taper {name!r}; choose from {sorted(BUILTIN_TAPERS)}"
        ) from None


def custom_taper(fn: Callable, even: bool = True, name: str = "custom",
                 check_points: int = 257) -> Taper:
    """Wrap a user-supplied callable as a Taper.

    The declared evenness is verified by sampling rather than trusted:
    h(t) == h(-t) must hold on a uniform grid, as must nonnegativity.
    """
    taper = Taper(name, fn)
    t = np.linspace(0.0, 1.0, check_points)
    left = taper(-t)
    right = taper(t)
    if not even:
        raise ValueError("tapers must be declared even; odd tapers are not supported")
    if not np.allclose(left, right, rtol=0.0, atol=1e-12):
        raise ValueError("custom taper is not even: h(t) != h(-t) on sample grid")
    if np.any(right < -1e-15):
        raise ValueError("custom taper takes negative values on sample grid")
    outside = taper(np.array([1.5, -2.0, 10.0]))
    if np.any(np.abs(outside) > 1e-15):
        raise ValueError("custom taper must vanish outside [-1, 1]")
    return taper


def taper_series(taper: Taper, T: int) -> np.ndarray:
    """Sampled taper weights [h(-T/T), ..., h(0), ..., h(T/T)], length 2T+1."""
    if T < 1:
        raise ValueError("T must be >= 1")
    t = np.arange(-T, T + 1, dtype=float) / T
    return taper(t)


def h_norm_discrete(taper: Taper, T: int, k: int, lam: float) -> complex:
    """H_{k,T}(lam) = sum_{t=-T}^{T} h(t/T)^k exp(-i*lam*t).

    Real at lam = 0 (and for every real lam, by evenness of h the value
    is real; the complex type is kept for interface uniformity).
    """
    if T < 1:
        raise ValueError("T must be >= 1")
    if k < 1:
        raise ValueError("k must be >= 1")
    h = taper_series(taper, T)
    t = np.arange(-T, T + 1, dtype=float)
    return complex(np.sum(h**k * np.exp(-1j * lam * t)))


def h_kt_zero(taper: Taper, T: int, k: int) -> float:
    """H_{k,T}(0) = sum h(t/T)^k, the k-th discrete taper moment."""
    if T < 1:
        raise ValueError("T must be >= 1")
    if k < 1:
        raise ValueError("k must be >= 1")
    h = taper_series(taper, T)
    return float(np.sum(h**k))


def h_k_zero(taper: Taper, k: int, quadrature_points: int = 1025) -> float:
    """Continuous moment H_k = integral over [-1,1] of h(t)^k dt.

    Composite Simpson on a uniform grid; the built-in tapers are smooth
    or piecewise linear, so 1025 points give >= 8 correct digits.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if quadrature_points < 64:
        raise ValueError("quadrature_points must be >= 64")
    if quadrature_points % 2 == 0:
        quadrature_points += 1  # Simpson needs an odd point count
    t = np.linspace(-1.0, 1.0, quadrature_points)
    return float(simpson(taper(t) ** k, x=t))


def e_of_h(taper: Taper, quadrature_points: int = 1025) -> float:
    """Variance-inflation factor e(h) = (int h^2)^(-2) * int h^4."""
    h2 = h_k_zero(taper, 2, quadrature_points)
    h4 = h_k_zero(taper, 4, quadrature_points)
    if h2 <= 0.0:
        raise DegenerateTaperError("taper has zero L2 mass; e(h) undefined")
    return h4 / (h2 * h2)


@dataclass(frozen=True)
class TaperNorms:
    """Discrete and continuous taper norms at a given half-window T."""

    T: int
    H_kT_zero: dict
    H_k_zero: dict
    e_h: float


def taper_norms(taper: Taper, T: int, ks=(1, 2, 3, 4)) -> TaperNorms:
    """Bundle H_{k,T}(0), H_k and e(h) for the requested orders."""
    discrete = {k: h_kt_zero(taper, T, k) for k in ks}
    continuous = {k: h_k_zero(taper, k) for k in ks}
    return TaperNorms(T=T, H_kT_zero=discrete, H_k_zero=continuous,
                      e_h=e_of_h(taper))


def discrete_total_variation(taper: Taper, grid_points: int = 4097) -> float:
    """Total variation of h over [-1, 1] approximated on a uniform grid.

    For a bounded-variation taper this converges (from below) as the grid
    refines; it is the testable surrogate for the finiteness requirement.
    """
    t = np.linspace(-1.0, 1.0, grid_points)
    return float(np.sum(np.abs(np.diff(taper(t)))))
