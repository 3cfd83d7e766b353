"""Stationary process models with known spectra, and exact simulation.

Spectral convention: the autocovariance is recovered from the spectral
density by c(tau) = integral over (-pi, pi] of f(lam)*exp(i*tau*lam),
so white noise with variance sigma^2 has the flat density sigma^2/(2*pi).
All 2*pi bookkeeping downstream follows from this choice.

Four families are provided:

* ``gaussian_white``  -- i.i.d. N(0, sigma^2);
* ``gaussian_ar1``    -- Gaussian AR(1), c(tau) = sigma^2 rho^|tau| / (1-rho^2);
* ``gaussian_ma1``    -- Gaussian MA(1), Y(t) = eps(t) + theta*eps(t-1);
* ``linear_nongaussian`` -- finite-order causal filter of i.i.d. innovations
  with known cumulants (kappa2, kappa3, kappa4), giving a tractable
  fourth-order cumulant spectrum (trispectrum).

Gaussian families are simulated by circulant embedding, which is exact in
law; the linear family by exact finite convolution of the innovation
sequence (the filter is finite-order, so warmup is exactly q = len(psi)-1
extra innovations and there is no initialization bias).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

TWO_PI = 2.0 * np.pi

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def derive_seed(base_seed: int, index: int) -> int:
    """Per-replicate seed via a splitmix-style finalizer.

    Distinct replicate indices give decorrelated 64-bit seeds, so
    replicates can be generated in any order or in parallel and still
    be bitwise reproducible.
    """
    z = (int(base_seed) + (int(index) + 1) * _GOLDEN) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


@dataclass(frozen=True)
class InnovationLaw:
    """An i.i.d. innovation law with its first four cumulants.

    ``sample(rng, size)`` draws zero-mean innovations; kappa2/3/4 are the
    exact cumulants of one draw (kappa4 is the excess over Gaussian).
    """

    name: str
    kappa2: float
    kappa3: float
    kappa4: float
    sample: Callable[[np.random.Generator, int], np.ndarray]


def gaussian_law(scale: float = 1.0) -> InnovationLaw:
    s = float(scale)
    return InnovationLaw(
        "gaussian", s**2, 0.0, 0.0,
        lambda rng, size: s * rng.standard_normal(size),
    )


def exponential_law(scale: float = 1.0) -> InnovationLaw:
    # centered exponential scale*(E - 1), E ~ Exp(1): skewed, kappa4 > 0
    s = float(scale)
    return InnovationLaw(
        "exponential", s**2, 2.0 * s**3, 6.0 * s**4,
        lambda rng, size: s * (rng.standard_exponential(size) - 1.0),
    )


def twopoint_law(scale: float = 1.0) -> InnovationLaw:
    # symmetric two-point +-scale: zero skew, kappa4 = -2*scale^4 < 0
    s = float(scale)
    return InnovationLaw(
        "twopoint", s**2, 0.0, -2.0 * s**4,
        lambda rng, size: s * (2.0 * rng.integers(0, 2, size) - 1.0).astype(float),
    )


INNOVATION_LAWS = {
    "gaussian": gaussian_law,
    "exponential": exponential_law,
    "twopoint": twopoint_law,
}

GAUSSIAN_FAMILIES = ("gaussian_white", "gaussian_ar1", "gaussian_ma1")


@dataclass(frozen=True)
class SpectralModel:
    """A stationary zero-mean model with closed-form second-order spectrum.

    For ``linear_nongaussian`` the process is Y(t) = sum_j psi[j]*eps(t-j)
    with i.i.d. innovations following ``law``; psi is a finite causal
    coefficient vector.
    """

    family: str
    sigma2: float = 1.0
    rho: float = 0.0
    theta: float = 0.0
    psi: tuple = (1.0,)
    law: Optional[InnovationLaw] = None

    def __post_init__(self):
        if self.family not in GAUSSIAN_FAMILIES + ("linear_nongaussian",):
            raise ValueError(f"unknown model family {self.family!r}")
        if self.sigma2 <= 0:
            raise ValueError("sigma2 must be > 0")
        if self.family == "gaussian_ar1" and not abs(self.rho) < 1:
            raise ValueError("AR coefficient must satisfy |rho| < 1")


def gaussian_white(sigma2: float = 1.0) -> SpectralModel:
    return SpectralModel("gaussian_white", sigma2=sigma2)


def gaussian_ar1(rho: float, sigma2: float = 1.0) -> SpectralModel:
    return SpectralModel("gaussian_ar1", sigma2=sigma2, rho=rho)


def gaussian_ma1(theta: float, sigma2: float = 1.0) -> SpectralModel:
    return SpectralModel("gaussian_ma1", sigma2=sigma2, theta=theta)


def linear_nongaussian(law: InnovationLaw, psi=(1.0,)) -> SpectralModel:
    psi = tuple(float(c) for c in psi)
    if len(psi) == 0:
        raise ValueError("psi must have at least one coefficient")
    return SpectralModel("linear_nongaussian", sigma2=law.kappa2, psi=psi, law=law)


def is_gaussian(model: SpectralModel) -> bool:
    """True when every finite-dimensional law of the model is Gaussian."""
    if model.family in GAUSSIAN_FAMILIES:
        return True
    return model.law is not None and model.law.name == "gaussian"


def kappa(model: SpectralModel) -> tuple:
    """Innovation cumulants (kappa2, kappa3, kappa4)."""
    if model.family in GAUSSIAN_FAMILIES:
        return (model.sigma2, 0.0, 0.0)
    if model.law is None:
        raise ValueError("linear model lacks an innovation law; cumulants unknown")
    return (model.law.kappa2, model.law.kappa3, model.law.kappa4)


def transfer(model: SpectralModel, lam) -> np.ndarray:
    """Transfer function psi(lam) = sum_j psi_j exp(-i*j*lam) of the filter."""
    lam = np.asarray(lam, dtype=float)
    if model.family == "gaussian_white":
        return np.ones_like(lam, dtype=complex)
    if model.family == "gaussian_ar1":
        return 1.0 / (1.0 - model.rho * np.exp(-1j * lam))
    if model.family == "gaussian_ma1":
        return 1.0 + model.theta * np.exp(-1j * lam)
    coeffs = np.asarray(model.psi)
    j = np.arange(len(coeffs))
    return np.exp(-1j * np.multiply.outer(lam, j)) @ coeffs


def spectral_density(model: SpectralModel, lam) -> np.ndarray:
    """Second-order spectral density f(lam) = (kappa2/2pi)|psi(lam)|^2."""
    k2 = kappa(model)[0]
    psi = transfer(model, lam)
    return (k2 / TWO_PI) * np.abs(psi) ** 2


def trispectrum(model: SpectralModel, l1, l2, l3) -> np.ndarray:
    """Fourth-order cumulant spectral density.

    Identically zero for Gaussian families; for a linear filter of i.i.d.
    innovations,

        f4(l1,l2,l3) = kappa4/(2pi)^3 * psi(l1)psi(l2)psi(l3)psi(-l1-l2-l3).
    """
    l1 = np.asarray(l1, dtype=float)
    l2 = np.asarray(l2, dtype=float)
    l3 = np.asarray(l3, dtype=float)
    if model.family in GAUSSIAN_FAMILIES:
        return np.zeros(np.broadcast(l1, l2, l3).shape, dtype=complex)
    k4 = kappa(model)[2]
    p = transfer
    return (k4 / TWO_PI**3) * p(model, l1) * p(model, l2) * p(model, l3) \
        * p(model, -l1 - l2 - l3)


def autocovariance(model: SpectralModel, tau) -> np.ndarray:
    """Autocovariance c(tau); even in tau, |c(tau)| <= c(0)."""
    tau = np.abs(np.asarray(tau, dtype=int))
    s2 = model.sigma2
    if model.family == "gaussian_white":
        return np.where(tau == 0, s2, 0.0)
    if model.family == "gaussian_ar1":
        return s2 * model.rho**tau.astype(float) / (1.0 - model.rho**2)
    if model.family == "gaussian_ma1":
        c0 = s2 * (1.0 + model.theta**2)
        c1 = s2 * model.theta
        return np.select([tau == 0, tau == 1], [c0, c1], default=0.0)
    # finite MA: c(tau) = kappa2 * sum_j psi_j psi_{j+tau}
    k2 = kappa(model)[0]
    coeffs = np.asarray(model.psi)
    q = len(coeffs) - 1
    out = np.zeros(tau.shape, dtype=float)
    for d in np.unique(tau):
        if d <= q:
            out[tau == d] = k2 * np.dot(coeffs[: q + 1 - d], coeffs[d:])
    return out


def significant_lag(model: SpectralModel, rel_tol: float = 1e-17) -> int:
    """Largest lag with |c(tau)| > rel_tol * c(0).

    Everything beyond is below double-precision resolution relative to
    c(0), so Toeplitz and embedding constructions may stop there.
    """
    if model.family == "gaussian_white":
        return 0
    if model.family == "gaussian_ma1":
        return 1
    if model.family == "linear_nongaussian":
        return len(model.psi) - 1
    r = abs(model.rho)
    if r == 0.0:
        return 0
    return int(np.ceil(np.log(rel_tol) / np.log(r)))


@dataclass(frozen=True)
class SamplePath:
    """Observations Y(-T), ..., Y(T) with the seed that produced them."""

    T: int
    values: np.ndarray
    seed: int

    def __post_init__(self):
        if len(self.values) != 2 * self.T + 1:
            raise ValueError("path length must be 2T+1")


class EmbeddingError(RuntimeError):
    """Circulant embedding produced a significantly negative eigenvalue."""


def _embedding_spectrum(model: SpectralModel, n: int):
    """Eigenvalues (and order M) of the circulant embedding of c(.).

    M >= 2n guarantees the first n samples of the circulant process carry
    the exact target covariance at all lags that fit in the window.
    Eigenvalues more negative than -1e-10 * max are an error; smaller
    negatives are rounding noise and are clamped to zero.
    """
    M = 1
    while M < 2 * n:
        M *= 2
    half = M // 2
    c = autocovariance(model, np.arange(half + 1))
    c_per = np.concatenate([c, c[-2:0:-1]])
    eig = np.fft.fft(c_per).real
    floor = -1e-10 * eig.max()
    if eig.min() < floor:
        raise EmbeddingError(
            f"circulant embedding failed: eigenvalue {eig.min():.3e} below "
            f"tolerance {floor:.3e}"
        )
    return np.maximum(eig, 0.0), M


def _simulate_rows(model: SpectralModel, T: int, seeds) -> np.ndarray:
    """Stack of sample paths, one per seed; rows depend only on their seed."""
    n = 2 * T + 1
    out = np.empty((len(seeds), n))
    if model.family in GAUSSIAN_FAMILIES:
        eig, M = _embedding_spectrum(model, n)
        w = np.sqrt(eig / M)
        z = np.empty((len(seeds), M), dtype=complex)
        for r, s in enumerate(seeds):
            rng = np.random.default_rng(s)
            z[r] = rng.standard_normal(M) + 1j * rng.standard_normal(M)
        out[:] = np.fft.fft(z * w, axis=1).real[:, :n]
    else:
        if model.law is None:
            raise ValueError("linear model lacks an innovation law; cannot simulate")
        q = len(model.psi) - 1
        for r, s in enumerate(seeds):
            rng = np.random.default_rng(s)
            eps = model.law.sample(rng, n + q)
            # valid-mode convolution is the exact causal filter: entry i is
            # sum_j psi[j] * eps[i + q - j], so the first q draws serve as
            # warmup and the output is exactly stationary
            out[r] = np.convolve(eps, model.psi, mode="valid")
    return out


def simulate(model: SpectralModel, T: int, seed: int) -> SamplePath:
    """One exact sample path on t = -T..T, deterministic in (model, T, seed)."""
    if T < 1:
        raise ValueError("T must be >= 1")
    values = _simulate_rows(model, T, [seed])[0]
    return SamplePath(T=T, values=values, seed=int(seed))


def simulate_batch(model: SpectralModel, T: int, base_seed: int,
                   start: int, count: int) -> np.ndarray:
    """Rows r = start..start+count-1 of the replicate ensemble.

    Row r is simulate(model, T, derive_seed(base_seed, r)).values, so any
    chunking of the replicate range reproduces identical rows.
    """
    seeds = [derive_seed(base_seed, start + r) for r in range(count)]
    return _simulate_rows(model, T, seeds)
