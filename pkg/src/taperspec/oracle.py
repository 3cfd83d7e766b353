"""Exact finite-sample moments of periodogram functionals (Gaussian case).

For a Gaussian path, moments of products of the tapered transforms
d_T(.) reduce to sums over pair partitions of products of second-order
quantities (Wick expansion).  With the position-to-frequency convention
that the product (d(lam) d(-lam))^k assigns +lam to even 0-based slots
and -lam to odd slots, every pair falls into one of three value classes,

    A(lam) = cov(d(lam), d(lam)),   B(lam) = cov(d(lam), d(-lam)),
    conj(A)(lam) = cov(d(-lam), d(-lam)),

(and cross-frequency analogues P, Q for covariances), so a pairing's
contribution collapses to a monomial in these tables.  Joint cumulants of
two such products keep only the pairings that connect the two rows of the
index table (indecomposable pairings); the within-row-only pairings are
exactly the product of the separate expectations and cancel.

Everything here is an exact expectation at finite T, not an estimate:
these values serve as oracles against Monte Carlo and against the
asymptotic limit formulas.

A separate brute-force path (`fourth_moment_cov_bruteforce`) enumerates
all n^4 fourth moments directly from the innovation law's moments at
T <= 8, with no partition bookkeeping at all; it validates the
fourth-cumulant (trispectrum) covariance contribution for i.i.d.
non-Gaussian data.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import toeplitz

from .tapers import Taper, taper_series, h_kt_zero
from .models import SpectralModel, TWO_PI, autocovariance, is_gaussian, kappa, significant_lag
from .periodogram import FrequencyGrid, default_grid
from .functionals import WeightFunction

_MAX_HALF_PAIRS = 6  # (2*6-1)!! = 10395 pairings; enumeration guard


def double_factorial_odd(k: int) -> int:
    """(2k-1)!! = number of pair partitions of 2k elements."""
    out = 1
    for j in range(1, 2 * k, 2):
        out *= j
    return out


def enumerate_pair_partitions(k: int):
    """All pair partitions of {0, ..., 2k-1}, canonically ordered.

    Canonical form: each pair (i, j) has i < j, and the pairs are listed
    by increasing first element (the recursion always pairs the smallest
    free element first, which yields exactly this order).
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if k > _MAX_HALF_PAIRS:
        raise ValueError(f"pair enumeration limited to k <= {_MAX_HALF_PAIRS}")

    def rec(elems):
        if not elems:
            yield ()
            return
        first = elems[0]
        for idx in range(1, len(elems)):
            rest = elems[1:idx] + elems[idx + 1:]
            for tail in rec(rest):
                yield ((first, elems[idx]),) + tail

    return list(rec(tuple(range(2 * k))))


def is_indecomposable(pairing, row_sizes) -> bool:
    """Whether the pairing's blocks connect all rows of the index table.

    Rows are consecutive index segments of the given sizes.  Blocks act
    as hyperedges over row labels; the pairing is indecomposable exactly
    when the resulting row graph is connected (union-find).
    """
    bounds = np.cumsum(row_sizes)

    def row_of(idx):
        return int(np.searchsorted(bounds, idx, side="right"))

    parent = list(range(len(row_sizes)))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for i, j in pairing:
        ri, rj = find(row_of(i)), find(row_of(j))
        if ri != rj:
            parent[ri] = rj
    root = find(0)
    return all(find(r) == root for r in range(len(row_sizes)))


def indecomposable_pairings(k: int, l: int):
    """Pair partitions of the two-row table (2k entries, 2l entries)
    whose blocks connect the rows."""
    if k + l > _MAX_HALF_PAIRS:
        raise ValueError(f"table enumeration limited to k + l <= {_MAX_HALF_PAIRS}")
    table = enumerate_pair_partitions(k + l)
    rows = (2 * k, 2 * l)
    return [p for p in table if is_indecomposable(p, rows)]


# ---------------------------------------------------------------------------
# Covariances of the tapered Fourier transform


def dft_covariance(model: SpectralModel, taper: Taper, T: int,
                   lam: float, mu: float) -> complex:
    """cov(d_T(lam), d_T(mu)) = sum_{s,t} h(s/T)h(t/T) e^{-i lam s - i mu t} c(s-t).

    Evaluated in O(L*n) by summing over lags tau = s - t, where L is the
    last lag at which c is resolvable in double precision.
    """
    h = taper_series(taper, T)
    n = 2 * T + 1
    t_idx = np.arange(-T, T + 1, dtype=float)
    L = min(significant_lag(model), n - 1)
    taus = np.arange(-L, L + 1)
    c = autocovariance(model, taus)
    total = 0.0 + 0.0j
    for tau, c_tau in zip(taus, c):
        if c_tau == 0.0:
            continue
        lo, hi = max(0, -tau), min(n, n - tau)  # indices t with t+tau in range
        hh = h[lo + tau: hi + tau] * h[lo:hi]
        phase = np.exp(-1j * (lam + mu) * t_idx[lo:hi])
        total += c_tau * np.exp(-1j * lam * tau) * np.sum(hh * phase)
    return complex(total)


class DftCovarianceTables:
    """Memoized grids of transform covariances for one (model, taper, T).

    diag(grid) returns A(lam) = cov(d(lam), d(lam)) and the real vector
    B(lam) = cov(d(lam), d(-lam)); full(grid) additionally returns the
    N x N tables P(a, b) = cov(d(a), d(b)) and Q(a, b) = cov(d(a), d(-b)).
    Pairing sums reuse these tables heavily, hence the caching.
    """

    def __init__(self, model: SpectralModel, taper: Taper, T: int):
        self.model = model
        self.taper = taper
        self.T = T
        self._h = taper_series(taper, T)
        self._t = np.arange(-T, T + 1, dtype=float)
        self._diag_cache = {}
        self._full_cache = {}

    def _key(self, grid: FrequencyGrid):
        return grid.points.tobytes()

    def diag(self, grid: FrequencyGrid):
        key = self._key(grid)
        if key not in self._diag_cache:
            n = 2 * self.T + 1
            h, t = self._h, self._t
            lam = grid.points
            L = min(significant_lag(self.model), n - 1)
            taus = np.arange(-L, L + 1)
            c = autocovariance(self.model, taus)
            # B(lam) = sum_tau c(tau) g(tau) e^{-i lam tau},
            #   g(tau) = sum_t h(t+tau) h(t)  (zero-frequency taper autocorr)
            # A(lam) = sum_tau c(tau) e^{-i lam tau} G_tau(2 lam),
            #   G_tau(w) = sum_t h(t+tau) h(t) e^{-i w t}
            phase2 = np.exp(-1j * 2.0 * np.multiply.outer(lam, t))  # (N, n)
            A = np.zeros(len(lam), dtype=complex)
            B = np.zeros(len(lam), dtype=complex)
            for tau, c_tau in zip(taus, c):
                if c_tau == 0.0:
                    continue
                lo, hi = max(0, -tau), min(n, n - tau)
                hh = np.zeros(n)
                hh[lo:hi] = h[lo + tau: hi + tau] * h[lo:hi]
                lag_phase = c_tau * np.exp(-1j * lam * tau)
                A += lag_phase * (phase2 @ hh)
                B += lag_phase * hh.sum()
            self._diag_cache[key] = (A, B.real.copy())
        return self._diag_cache[key]

    def full(self, grid: FrequencyGrid):
        key = self._key(grid)
        if key not in self._full_cache:
            n = 2 * self.T + 1
            lam = grid.points
            L = min(significant_lag(self.model), n - 1)
            c_row = np.zeros(n)
            taus = np.arange(0, L + 1)
            c_row[: L + 1] = autocovariance(self.model, taus)
            C = toeplitz(c_row)
            U = self._h[:, None] * np.exp(-1j * np.multiply.outer(self._t, lam))
            CU = C @ U
            P = U.T @ CU
            Q = U.T @ np.conj(CU)
            self._full_cache[key] = (P, Q)
        return self._full_cache[key]


_TABLE_CACHE = {}


def _tables(model: SpectralModel, taper: Taper, T: int) -> DftCovarianceTables:
    key = (model, taper, T)
    if key not in _TABLE_CACHE:
        _TABLE_CACHE[key] = DftCovarianceTables(model, taper, T)
    return _TABLE_CACHE[key]


# ---------------------------------------------------------------------------
# Exact moments of J_{k,T} via pairings


def _require_gaussian(model: SpectralModel, what: str):
    if not is_gaussian(model):
        raise ValueError(
            f"{what} requires a Gaussian model: fourth-order innovation "
            "cumulants break the pairs-only expansion"
        )


def _sign_of_position(pos: int) -> int:
    # slots of (d(lam) d(-lam))^k alternate +lam, -lam, +lam, ...
    return 1 if pos % 2 == 0 else -1


def _mean_signatures(k: int):
    """Collapse pairings of 2k slots into (a, b, c) exponent signatures.

    a = pairs (+,+) -> A;  b = mixed-sign pairs -> B;  c = (-,-) -> conj(A).
    Returns {(a, b, c): multiplicity}.
    """
    sig_count = {}
    for pairing in enumerate_pair_partitions(k):
        a = b = c = 0
        for i, j in pairing:
            si, sj = _sign_of_position(i), _sign_of_position(j)
            if si == sj == 1:
                a += 1
            elif si == sj == -1:
                c += 1
            else:
                b += 1
        sig = (a, b, c)
        sig_count[sig] = sig_count.get(sig, 0) + 1
    return sig_count


def exact_mean_J(model: SpectralModel, taper: Taper, T: int,
                 phi: WeightFunction, k: int,
                 grid: FrequencyGrid | None = None):
    """Exact E J_{k,T}(phi) for Gaussian models, k <= 4.

    E I_T^k(lam) = (2 pi H_{2,T}(0))^{-k} * sum over pairings of products
    of transform covariances, then quadrature against phi on the grid.
    """
    _require_gaussian(model, "exact_mean_J")
    if not 1 <= k <= 4:
        raise ValueError("exact_mean_J supports 1 <= k <= 4")
    if grid is None:
        grid = default_grid(T)
    A, B = _tables(model, taper, T).diag(grid)
    inv_norm = 1.0 / (TWO_PI * h_kt_zero(taper, T, 2))
    mean_Ik = np.zeros(grid.N, dtype=complex)
    for (a, b, c), count in _mean_signatures(k).items():
        mean_Ik += count * A**a * B**b * np.conj(A) ** c
    mean_Ik *= inv_norm**k
    value = grid.weight * np.sum(phi(grid.points) * mean_Ik)
    if phi.is_real:
        assert abs(value.imag) <= 1e-10 * max(abs(value), 1.0)
        return float(value.real)
    return complex(value)


def _cov_signatures(k: int, l: int):
    """Exponent signatures of indecomposable pairings of the (k, l) table.

    Signature components, in order: within-row-1 (A1, B1, conj A1),
    within-row-2 (A2, B2, conj A2), cross (P, Q, conj P, conj Q) where
    P = cov(d(alpha), d(beta)) and Q = cov(d(alpha), d(-beta)).
    """
    sig_count = {}
    off = 2 * k
    for pairing in indecomposable_pairings(k, l):
        e = [0] * 10
        for i, j in pairing:
            in1_i, in1_j = i < off, j < off
            si = _sign_of_position(i if in1_i else i - off)
            sj = _sign_of_position(j if in1_j else j - off)
            if in1_i and in1_j:
                e[0 if si == sj == 1 else (2 if si == sj == -1 else 1)] += 1
            elif not in1_i and not in1_j:
                e[3 if si == sj == 1 else (5 if si == sj == -1 else 4)] += 1
            else:
                # orient the pair as (row-1 slot, row-2 slot)
                sa, sb = (si, sj) if in1_i else (sj, si)
                if sa == 1 and sb == 1:
                    e[6] += 1
                elif sa == 1 and sb == -1:
                    e[7] += 1
                elif sa == -1 and sb == -1:
                    e[8] += 1  # cov(-a,-b) = conj P
                else:
                    e[9] += 1  # cov(-a, b) = conj Q
        sig = tuple(e)
        sig_count[sig] = sig_count.get(sig, 0) + 1
    return sig_count


def exact_cov_J(model: SpectralModel, taper: Taper, T: int,
                phi1: WeightFunction, k: int,
                phi2: WeightFunction, l: int,
                grid: FrequencyGrid | None = None) -> complex:
    """Exact cov(J_{k,T}(phi1), J_{l,T}(phi2)) for Gaussian models, k+l <= 4.

    Only pairings connecting the two slot rows contribute; decomposable
    pairings reproduce E J_k * conj(E J_l) and cancel in the covariance.
    """
    _require_gaussian(model, "exact_cov_J")
    if k < 1 or l < 1 or k + l > 4:
        raise ValueError("exact_cov_J supports k, l >= 1 with k + l <= 4")
    if grid is None:
        grid = default_grid(T)
    tables = _tables(model, taper, T)
    A, B = tables.diag(grid)
    P, Q = tables.full(grid)
    inv_norm = 1.0 / (TWO_PI * h_kt_zero(taper, T, 2))
    col = lambda v: v[:, None]  # alpha varies down rows
    row = lambda v: v[None, :]  # beta varies across columns
    cov_I = np.zeros((grid.N, grid.N), dtype=complex)
    for sig, count in _cov_signatures(k, l).items():
        a1, b1, c1, a2, b2, c2, p, q, pc, qc = sig
        term = np.full((grid.N, grid.N), float(count), dtype=complex)
        if a1: term *= col(A**a1)
        if b1: term *= col(B**b1)
        if c1: term *= col(np.conj(A) ** c1)
        if a2: term *= row(A**a2)
        if b2: term *= row(B**b2)
        if c2: term *= row(np.conj(A) ** c2)
        if p: term *= P**p
        if q: term *= Q**q
        if pc: term *= np.conj(P) ** pc
        if qc: term *= np.conj(Q) ** qc
        cov_I += term
    cov_I *= inv_norm ** (k + l)
    w1 = phi1(grid.points)
    w2 = phi2(grid.points)
    value = grid.weight**2 * (w1 @ cov_I @ np.conj(w2))
    return complex(value)


# ---------------------------------------------------------------------------
# Fejer-type kernel diagnostics


def fejer_kernel(taper: Taper, T: int, k: int, lambdas) -> complex:
    """Kernel Phi_{k,T}(l_1..l_{k-1}) =
    (2 pi)^{1-k} H_{k,T}(0)^{-1} * prod_j H_{1,T}(l_j) * H_{1,T}(-sum l_j).

    Acts as an approximate identity under convolution as T grows.  Accepts
    a vector of k-1 frequencies, or an (m, k-1) array for m evaluations.
    """
    lams = np.atleast_2d(np.asarray(lambdas, dtype=float))
    if lams.shape[1] != k - 1:
        raise ValueError(f"need k-1 = {k-1} frequencies per evaluation")
    hk0 = h_kt_zero(taper, T, k)
    if hk0 == 0.0:
        raise ValueError("H_{k,T}(0) = 0; kernel undefined")
    h = taper_series(taper, T)
    t = np.arange(-T, T + 1, dtype=float)

    def H1(freqs):
        return np.exp(-1j * np.multiply.outer(freqs, t)) @ h

    prod = np.ones(lams.shape[0], dtype=complex)
    for j in range(k - 1):
        prod *= H1(lams[:, j])
    prod *= H1(-lams.sum(axis=1))
    out = TWO_PI ** (1 - k) / hk0 * prod
    return complex(out[0]) if np.isscalar(lambdas) or np.ndim(lambdas) == 1 else out


# ---------------------------------------------------------------------------
# Brute-force fourth moments (non-Gaussian validation, tiny T)


@dataclass(frozen=True)
class BruteForceCov:
    """cov(J_{1,T}(phi1), J_{1,T}(phi2)) from direct moment enumeration.

    ``gaussian`` re-runs the same enumeration with the innovation law
    replaced by moments of a Gaussian with matching variance, so
    ``kappa4_block = total - gaussian`` isolates the fourth-cumulant
    contribution without any cumulant bookkeeping in the enumeration.
    """

    total: complex
    gaussian: complex
    kappa4_block: complex


def fourth_moment_cov_bruteforce(model: SpectralModel, taper: Taper, T: int,
                                 phi1: WeightFunction, phi2: WeightFunction,
                                 grid: FrequencyGrid | None = None) -> BruteForceCov:
    """O(n^4) enumeration of cov(J_1(phi1), J_1(phi2)) for i.i.d. data.

    Every quadruple (s, t, u, v) contributes
    h_s h_t h_u h_v E[Y_s Y_t Y_u Y_v] e^{-i a (s-t) - i b (u-v)}; the
    fourth moment is read off the equality pattern of the indices from
    the innovation law's raw moments (independence + zero mean kill all
    patterns containing a lone index, including the mu3*mu1 ones).
    """
    if T > 8:
        raise ValueError("brute-force enumeration limited to T <= 8")
    if model.family != "linear_nongaussian" or len(model.psi) != 1:
        raise ValueError("brute force covers i.i.d. linear models (len(psi) == 1)")
    if grid is None:
        grid = default_grid(T)
    k2, k3, k4 = kappa(model)
    scale = model.psi[0]
    mu2 = k2 * scale**2
    mu4 = (k4 + 3.0 * k2**2) * scale**4

    n = 2 * T + 1
    h = taper_series(taper, T)
    idx = np.arange(n)
    S, Tt, U, V = np.meshgrid(idx, idx, idx, idx, indexing="ij", sparse=False)
    st = S == Tt
    uv = U == V
    su = S == U
    tv = Tt == V
    sv = S == V
    tu = Tt == U
    all4 = st & su & sv
    hprod = h[S] * h[Tt] * h[U] * h[V]

    def accumulate(m2_val, m4_val):
        pair_sum = ((st & uv & ~all4).astype(float)
                    + (su & tv & ~all4).astype(float)
                    + (sv & tu & ~all4).astype(float))
        m4_arr = np.where(all4, m4_val, 0.0) + m2_val**2 * pair_sum
        acc4 = np.zeros((2 * n - 1, 2 * n - 1))
        np.add.at(acc4, ((S - Tt).ravel() + n - 1, (U - V).ravel() + n - 1),
                  (hprod * m4_arr).ravel())
        # second moments: E[Y_s Y_t] = m2 * [s == t]
        acc2 = np.zeros(2 * n - 1)
        acc2[n - 1] = m2_val * float(h @ h)
        return acc4, acc2

    lags = np.arange(-(n - 1), n, dtype=float)
    a_pts = grid.points
    E_a = np.exp(-1j * np.multiply.outer(a_pts, lags))  # (N, 2n-1)
    inv_norm = 1.0 / (TWO_PI * float(h @ h))
    w1 = phi1(a_pts)
    w2 = phi2(a_pts)

    def cov_from(acc4, acc2):
        G = E_a @ acc4 @ E_a.T          # E d(a)d(-a)d(b)d(-b)
        EB = E_a @ acc2                 # E d(.)d(-.)
        cov_I = inv_norm**2 * (G - np.outer(EB, EB))
        return complex(grid.weight**2 * (w1 @ cov_I @ np.conj(w2)))

    total = cov_from(*accumulate(mu2, mu4))
    gauss = cov_from(*accumulate(mu2, 3.0 * mu2**2))
    return BruteForceCov(total=total, gaussian=gauss,
                         kappa4_block=total - gauss)
