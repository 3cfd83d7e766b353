"""Kernel backend parity: compiled extension vs numpy fallback."""
import numpy as np
import pytest

from taperspec._backend import HAVE_COMPILED, backend_name, get_kernels
from taperspec.functionals import constant, cosine_poly
from taperspec.models import gaussian_ar1
from taperspec.montecarlo import replicate_functionals
from taperspec.periodogram import default_grid
from taperspec.tapers import get_taper

needs_compiled = pytest.mark.skipif(not HAVE_COMPILED,
                                    reason="compiled extension not built")


def _kernel_inputs(R=37, T=9, N=25, m=2, seed=0):
    rng = np.random.default_rng(seed)
    n = 2 * T + 1
    X = rng.standard_normal((R, n))
    lam = np.linspace(-3.0, 3.0, N)
    t = np.arange(-T, T + 1, dtype=float)
    cos_t = np.cos(np.multiply.outer(lam, t))
    sin_t = np.sin(np.multiply.outer(lam, t))
    w_re = rng.standard_normal((m, N))
    w_im = np.zeros((m, N))
    ks = np.array([1, 3], dtype=np.int64)
    return X, cos_t, sin_t, w_re, w_im, ks, 1.0 / (2 * np.pi * n)


def test_numpy_backend_always_available():
    k = get_kernels("numpy")
    assert hasattr(k, "batch_functionals")


@needs_compiled
def test_backends_agree():
    args = _kernel_inputs()
    a = get_kernels("numpy").batch_functionals(*args)
    b = get_kernels("compiled").batch_functionals(*args)
    assert a.shape == b.shape == (37, 2)
    scale = np.max(np.abs(a))
    assert np.max(np.abs(a - b)) <= 1e-12 * scale


@needs_compiled
def test_compiled_thread_count_is_bitwise_stable():
    args = _kernel_inputs(R=301)
    k = get_kernels("compiled")
    one = k.batch_functionals(*args, num_threads=1)
    four = k.batch_functionals(*args, num_threads=4)
    assert np.array_equal(one, four)


def test_numpy_kernel_matches_direct_evaluation():
    X, cos_t, sin_t, w_re, w_im, ks, inv_norm = _kernel_inputs(R=5)
    out = get_kernels("numpy").batch_functionals(
        X, cos_t, sin_t, w_re, w_im, ks, inv_norm)
    # re-derive one entry by hand
    r, i = 3, 1
    d_re = cos_t @ X[r]
    d_im = sin_t @ X[r]
    I = (d_re**2 + d_im**2) * inv_norm
    expect = np.sum((w_re[i] + 1j * w_im[i]) * I ** int(ks[i]))
    assert out[r, i] == pytest.approx(expect, rel=1e-12)


def test_backend_env_forcing(monkeypatch):
    monkeypatch.setenv("TAPERSPEC_BACKEND", "numpy")
    assert backend_name() == "numpy"
    monkeypatch.delenv("TAPERSPEC_BACKEND")
    assert backend_name() in ("numpy", "compiled")
    monkeypatch.setenv("TAPERSPEC_BACKEND", "bogus")
    with pytest.raises(ValueError):
        get_kernels()


@needs_compiled
def test_backend_env_forcing_compiled(monkeypatch):
    monkeypatch.setenv("TAPERSPEC_BACKEND", "compiled")
    assert backend_name() == "compiled"


def test_full_pipeline_backend_parity(monkeypatch):
    # replicate_functionals through both backends: equal to rounding
    model = gaussian_ar1(0.5, 1.0)
    kwargs = dict(phis=(constant(), cosine_poly(1)), ks=(1, 2), T=16,
                  R=300, base_seed=11, grid=default_grid(16))

    monkeypatch.setenv("TAPERSPEC_BACKEND", "numpy")
    a = replicate_functionals(model, get_taper("cosine"), **kwargs)
    monkeypatch.delenv("TAPERSPEC_BACKEND")
    b = replicate_functionals(model, get_taper("cosine"), **kwargs)
    scale = np.max(np.abs(a))
    assert np.max(np.abs(a - b)) <= 1e-11 * scale
