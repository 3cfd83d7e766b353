"""Limit formulas for periodogram functionals as T grows.

For a stationary process with spectral density f (and fourth-order
cumulant spectrum f4 when non-Gaussian), the functional J_{k,T}(phi)
satisfies

    E J_{k,T}(phi)  ->  k! * integral phi(lam) f(lam)^k dlam

and the T-scaled covariances converge:

    T * cov(J_{k,T}(phi1), J_{l,T}(phi2))  ->  2 pi e(h) k l k! l! *
        [ integral phi1(lam) (conj(phi2)(lam) + conj(phi2)(-lam))
                    f(lam)^{k+l} dlam
        + double integral phi1(l1) conj(phi2)(l2) f(l1)^{k-1} f(l2)^{l-1}
                    f4(l1, -l1, l2) dl1 dl2 ].

The two bracketed terms are reported separately as the Gaussian part and
the trispectrum part: the latter vanishes exactly for Gaussian models, and
its sign follows the innovation kurtosis.  The same constant 2 pi e(h)
arises as the T -> infinity limit of T * 2 pi H_{4,T}(0) / H_{2,T}(0)^2;
passing ``finite_T`` uses that pre-limit taper factor instead, which is
the sharper prediction at small T and is exactly what the brute-force
fourth-moment oracle reproduces for i.i.d. data.

Also here: the covariance matrices for vectors of functionals (same
formula per entry), the cumulant decay reference T^{1-r}, and the
arithmetic validators for the L_p/L_q exponent conditions under which the
Gaussian-case results hold for unbounded weights.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import factorial, isclose
from typing import Optional

import numpy as np

from .tapers import Taper, e_of_h, h_kt_zero
from .models import SpectralModel, TWO_PI, is_gaussian, kappa, spectral_density, trispectrum
from .functionals import WeightFunction
from .periodogram import uniform_grid


def _midpoint_points(N: int) -> np.ndarray:
    """Midpoints -pi + 2*pi*(j - 1/2)/N, j = 1..N (tensor factors reuse this)."""
    j = np.arange(1, N + 1, dtype=float)
    return -np.pi + TWO_PI * (j - 0.5) / N


@dataclass(frozen=True)
class LimitMean:
    """Limit of E J_{k,T}(phi): k! * integral phi f^k."""

    value: float
    k: int
    phi_label: str
    model_family: str


def limit_mean(model: SpectralModel, phi: WeightFunction, k: int,
               quadrature_N: int = 4096) -> LimitMean:
    if k < 1:
        raise ValueError("k must be >= 1")
    grid = uniform_grid(quadrature_N)
    f = spectral_density(model, grid.points)
    val = factorial(k) * grid.weight * np.sum(phi(grid.points) * f**k)
    val = complex(val)
    if phi.is_real:
        val = val.real
    return LimitMean(value=val, k=k, phi_label=phi.label,
                     model_family=model.family)


@dataclass(frozen=True)
class LimitCovariance:
    """Limit of T * cov(J_{k,T}(phi1), J_{l,T}(phi2)), split into parts.

    total = gaussian_part + trispectrum_part; the trispectrum part is 0
    for Gaussian models.
    """

    gaussian_part: complex
    trispectrum_part: complex
    k: int
    l: int

    @property
    def total(self) -> complex:
        return self.gaussian_part + self.trispectrum_part


def _taper_factor(taper: Taper, finite_T: Optional[int]) -> float:
    """2 pi e(h), or its finite-T counterpart T * 2 pi H_{4,T}(0)/H_{2,T}(0)^2."""
    if finite_T is None:
        return TWO_PI * e_of_h(taper)
    h2 = h_kt_zero(taper, finite_T, 2)
    h4 = h_kt_zero(taper, finite_T, 4)
    return finite_T * TWO_PI * h4 / (h2 * h2)


def limit_covariance(model: SpectralModel, phi1: WeightFunction, k: int,
                     phi2: WeightFunction, l: int, taper: Taper,
                     quadrature_N: int = 2048, double_N: int = 257,
                     finite_T: Optional[int] = None) -> LimitCovariance:
    """Both parts of the limiting T-scaled covariance.

    The single integral runs on a uniform grid of quadrature_N points;
    the trispectrum double integral on a double_N x double_N tensor
    midpoint rule (the built-in f4 are smooth, so 257^2 is plenty).
    """
    if k < 1 or l < 1:
        raise ValueError("powers must be >= 1")
    scale = _taper_factor(taper, finite_T) * k * l * factorial(k) * factorial(l)

    grid = uniform_grid(quadrature_N)
    lam = grid.points
    f = spectral_density(model, lam)
    p1 = phi1(lam)
    p2bar = np.conj(phi2(lam))
    p2bar_neg = np.conj(phi2(-lam))
    gauss = scale * grid.weight * np.sum(p1 * (p2bar + p2bar_neg) * f ** (k + l))

    if is_gaussian(model):
        tris = 0.0 + 0.0j
    else:
        kappa(model)  # raises if the law carries no cumulant metadata
        pts = _midpoint_points(double_N)
        w2 = (TWO_PI / double_N) ** 2
        fa = spectral_density(model, pts)
        g1 = phi1(pts) * fa ** (k - 1)
        g2 = np.conj(phi2(pts)) * fa ** (l - 1)
        f4 = trispectrum(model, pts[:, None], -pts[:, None], pts[None, :])
        tris = scale * w2 * (g1 @ f4 @ g2)

    return LimitCovariance(gaussian_part=complex(gauss),
                           trispectrum_part=complex(tris), k=k, l=l)


def clt_covariance_matrix(model: SpectralModel, phis, ks, taper: Taper,
                          quadrature_N: int = 2048, double_N: int = 257,
                          psd_tol: float = 1e-8) -> np.ndarray:
    """Limit covariance matrix of sqrt(T)-normalized functional vectors.

    Entry (i, j) is limit_covariance(phi_i, k_i, phi_j, k_j).total; the
    result is validated Hermitian positive semidefinite to psd_tol.
    """
    if len(phis) != len(ks) or len(ks) == 0:
        raise ValueError("phis and ks must have equal nonzero length")
    m = len(ks)
    W = np.empty((m, m), dtype=complex)
    for i in range(m):
        for j in range(i, m):
            W[i, j] = limit_covariance(model, phis[i], ks[i], phis[j], ks[j],
                                       taper, quadrature_N, double_N).total
            W[j, i] = np.conj(W[i, j])
    scale = max(np.abs(np.diag(W)).max(), 1.0)
    if np.abs(W - W.conj().T).max() > psd_tol * scale:
        raise ValueError("covariance matrix failed Hermitian validation")
    eigs = np.linalg.eigvalsh(W)
    if eigs.min() < -psd_tol * scale:
        raise ValueError(
            f"covariance matrix not positive semidefinite: min eig {eigs.min():.3e}"
        )
    return W


def cumulant_order_bound(r: int, T: int) -> float:
    """Reference decay T^(1-r) for order-r joint cumulants of the J vector."""
    if r < 3:
        raise ValueError("cumulant order must be >= 3")
    return float(T) ** (1 - r)


@dataclass(frozen=True)
class ExponentCondition:
    """An L_p/L_q exponent relation for weights phi in L_q, density in L_p.

    which selects the relation:
      thm2_mean:      1/q + k/p = 1      (mean convergence)
      thm2_cov:       1/q + ((k+l)/2)/p = 1/2
      thm2_cum_equal: 1/q + k/p = 1/2    (order >= 3 cumulant decay)
      thm2_cum_mixed: 1/q + (mean of k_list)/p = 1/2
      thm4_clt:       1/q + k/p = 1/2
      thm6_clt:       1/q + min(k_list)/p = 1/2
    """

    which: str
    p: float
    q: float
    k: Optional[int] = None
    l: Optional[int] = None
    k_list: Optional[tuple] = None


def _inv(x: float) -> float:
    if x == np.inf:
        return 0.0
    if x < 1:
        raise ValueError("exponents must lie in [1, inf]")
    return 1.0 / x


def check_exponents(cond: ExponentCondition):
    """Evaluate the selected relation; returns (satisfied, diagnostic)."""
    ip, iq = _inv(cond.p), _inv(cond.q)
    if cond.which == "thm2_mean":
        lhs, rhs, desc = iq + cond.k * ip, 1.0, "1/q + k/p = 1"
    elif cond.which == "thm2_cov":
        lhs, rhs, desc = iq + 0.5 * (cond.k + cond.l) * ip, 0.5, \
            "1/q + ((k+l)/2)/p = 1/2"
    elif cond.which == "thm2_cum_equal":
        lhs, rhs, desc = iq + cond.k * ip, 0.5, "1/q + k/p = 1/2"
    elif cond.which == "thm2_cum_mixed":
        mean_k = sum(cond.k_list) / len(cond.k_list)
        lhs, rhs, desc = iq + mean_k * ip, 0.5, "1/q + (avg k)/p = 1/2"
    elif cond.which == "thm4_clt":
        lhs, rhs, desc = iq + cond.k * ip, 0.5, "1/q + k/p = 1/2"
    elif cond.which == "thm6_clt":
        lhs, rhs, desc = iq + min(cond.k_list) * ip, 0.5, \
            "1/q + min(k_i)/p = 1/2"
    else:
        raise ValueError(f"unknown exponent condition {cond.which!r}")
    ok = isclose(lhs, rhs, rel_tol=0.0, abs_tol=1e-12)
    state = "satisfied" if ok else "violated"
    return ok, f"{cond.which}: {desc} {state} (lhs = {lhs:.6g}, rhs = {rhs:.6g})"


def bias_gap(model: SpectralModel, phi: WeightFunction, k: int, taper: Taper,
             T: int, oracle_mean: float, quadrature_N: int = 4096) -> float:
    """sqrt(T) * (exact finite-T mean - limit mean).

    The central limit statements center at the limit functional only when
    this gap vanishes; the Monte Carlo suite tracks its trend over a
    T-sweep rather than asserting it.
    """
    lm = limit_mean(model, phi, k, quadrature_N).value
    return float(np.sqrt(T) * (oracle_mean - lm))
