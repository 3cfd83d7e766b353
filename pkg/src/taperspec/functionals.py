"""Integral functionals of powers of the periodogram.

J_{k,T}(phi) = integral over (-pi, pi] of phi(lam) * I_T(lam)^k d(lam),
computed by equal-weight Riemann quadrature on a frequency grid.  On the
uniform grids used here the rule integrates trigonometric polynomials of
degree < N exactly, so for the rectangular taper on the Fourier grid the
k = 1, phi = 1 functional reproduces the mean square of the data exactly
(Parseval); that identity is used as a free correctness check in tests.

Complex-valued weights are supported (covariance formulas pair phi with a
conjugated partner); real output is asserted only for real weights.
Discontinuous band indicators are permitted but flagged with a warning
marker, since the limit theory assumes continuous bounded weights.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .tapers import Taper
from .models import SamplePath
from .periodogram import (FrequencyGrid, PeriodogramGrid, default_grid,
                          periodogram_grid)

DISCONTINUOUS_WARNING = "weight is discontinuous: continuity assumption violated"


@dataclass(frozen=True)
class WeightFunction:
    """A weight phi on (-pi, pi] with an optional integrability exponent.

    ``declared_q`` is the L_q class the caller asserts phi belongs to;
    it feeds the exponent-condition validators and is not verified here.
    """

    kind: str
    evaluate: Callable[[np.ndarray], np.ndarray]
    label: str
    is_real: bool = True
    continuous: bool = True
    declared_q: Optional[float] = None

    def __call__(self, lam):
        return self.evaluate(np.asarray(lam, dtype=float))


def constant(c: float = 1.0) -> WeightFunction:
    val = complex(c) if isinstance(c, complex) else float(c)
    return WeightFunction(
        "constant", lambda lam: np.full_like(lam, val, dtype=type(val)),
        label="one" if val == 1.0 else f"const:{val!r}",
        is_real=not isinstance(val, complex), declared_q=np.inf,
    )


def cosine_poly(j: int) -> WeightFunction:
    j = int(j)
    if j < 0:
        raise ValueError("cosine order must be >= 0")
    return WeightFunction(
        "cosine_poly", lambda lam: np.cos(j * lam), label=f"cos:{j}",
        is_real=True, declared_q=np.inf,
    )


def indicator_band(a: float, b: float) -> WeightFunction:
    if not -np.pi < a < b <= np.pi:
        raise ValueError("band must satisfy -pi < a < b <= pi")
    return WeightFunction(
        "indicator_band",
        lambda lam: ((lam > a) & (lam <= b)).astype(float),
        label=f"band:{a:g},{b:g}", is_real=True, continuous=False,
        declared_q=np.inf,
    )


def custom_weight(fn: Callable, label: str = "custom", is_real: bool = True,
                  continuous: bool = True, q: Optional[float] = None) -> WeightFunction:
    return WeightFunction("custom", fn, label=label, is_real=is_real,
                          continuous=continuous, declared_q=q)


def parse_weight(spec: str) -> WeightFunction:
    """Parse the CLI weight mini-language: one | cos:j | band:a,b."""
    if spec == "one":
        return constant(1.0)
    if spec.startswith("cos:"):
        return cosine_poly(int(spec[4:]))
    if spec.startswith("band:"):
        parts = spec[5:].split(",")
        if len(parts) != 2:
            raise ValueError(f"band weight needs two endpoints, got {spec!r}")
        return indicator_band(float(parts[0]), float(parts[1]))
    raise ValueError(f"unknown weight spec {spec!r}; use one | cos:j | band:a,b")


@dataclass(frozen=True)
class FunctionalEstimate:
    """A single J_{k,T}(phi) value with evaluation provenance."""

    value: complex
    k: int
    T: int
    grid_N: int
    provenance: str = "empirical"
    warning: Optional[str] = None

    @property
    def real_value(self) -> float:
        return self.value.real


def _quadrature(pg: PeriodogramGrid, phi: WeightFunction, k: int) -> complex:
    w = phi(pg.grid.points)
    return complex(pg.grid.weight * np.sum(w * pg.I**k))


def estimate_batch(path: SamplePath, taper: Taper, phis, ks,
                   grid: FrequencyGrid | None = None) -> list:
    """J_{k_i,T}(phi_i) for all components, sharing one periodogram pass."""
    if len(phis) != len(ks) or len(ks) == 0:
        raise ValueError("phis and ks must have equal nonzero length")
    for k in ks:
        if int(k) < 1:
            raise ValueError("powers must be >= 1")
    if grid is None:
        grid = default_grid(path.T)
    pg = periodogram_grid(path, taper, grid)
    out = []
    for phi, k in zip(phis, ks):
        value = _quadrature(pg, phi, int(k))
        warning = None if phi.continuous else DISCONTINUOUS_WARNING
        out.append(FunctionalEstimate(value=value, k=int(k), T=path.T,
                                      grid_N=grid.N, provenance="empirical",
                                      warning=warning))
    return out


def estimate(path: SamplePath, taper: Taper, phi: WeightFunction, k: int,
             grid: FrequencyGrid | None = None) -> FunctionalEstimate:
    """J_{k,T}(phi) for a single weight/power pair."""
    return estimate_batch(path, taper, [phi], [k], grid)[0]
