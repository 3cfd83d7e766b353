"""Pure-numpy fallback kernel: batched tapered DFT -> periodogram powers
-> weighted quadrature, expressed as BLAS matrix products.

Mirrors the compiled kernel's contract exactly; ``num_threads`` is accepted
for signature parity (numpy's own BLAS threading is configured via the
usual environment variables and does not depend on it).
"""
from __future__ import annotations

import numpy as np

_CHUNK = 256  # fixed internal blocking so results never depend on callers


def batch_functionals(X, cos_t, sin_t, w_re, w_im, ks, inv_norm,
                      num_threads: int = 1) -> np.ndarray:
    """J values for a block of replicates.

    X (R, n): tapered paths h(t/T) * Y(t);
    cos_t, sin_t (N, n): cos/sin of lam_j * t on the evaluation grid;
    w_re, w_im (m, N): quadrature-weighted weight-function values;
    ks (m,): integer powers; inv_norm = 1 / (2 pi H_{2,T}(0)).

    Returns (R, m) complex: row r holds J_{k_i,T}(phi_i) for replicate r.
    """
    X = np.asarray(X, dtype=float)
    R = X.shape[0]
    m = len(ks)
    wc = np.asarray(w_re) + 1j * np.asarray(w_im)
    out = np.empty((R, m), dtype=np.complex128)
    for s in range(0, R, _CHUNK):
        xa = X[s:s + _CHUNK]
        dre = xa @ cos_t.T
        dim = xa @ sin_t.T  # true imag part is negated; squaring removes the sign
        I = (dre * dre + dim * dim) * inv_norm
        for i in range(m):
            out[s:s + _CHUNK, i] = (I ** int(ks[i])) @ wc[i]
    return out
