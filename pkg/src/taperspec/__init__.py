"""taperspec: integral functionals of powers of the tapered periodogram.

Library layout:

* ``tapers``       -- taper functions h and the norms H_{k,T}, H_k, e(h);
* ``models``       -- stationary models (spectra, trispectra, simulation);
* ``periodogram``  -- tapered DFT and periodogram on frequency grids;
* ``functionals``  -- the statistics J_{k,T}(phi) by quadrature;
* ``oracle``       -- exact finite-T moments via pair partitions;
* ``asymptotics``  -- limit means, covariances, exponent conditions;
* ``montecarlo``   -- replicated verification suites;
* ``cli``          -- the ``taperspec`` command.
"""

__version__ = "0.1.0"

from .tapers import (
    BARTLETT,
    COSINE,
    RECTANGULAR,
    Taper,
    e_of_h,
    get_taper,
    h_norm_discrete,
    taper_norms,
    taper_series,
)
from .models import (
    SamplePath,
    SpectralModel,
    autocovariance,
    derive_seed,
    gaussian_ar1,
    gaussian_ma1,
    gaussian_white,
    linear_nongaussian,
    simulate,
    spectral_density,
    trispectrum,
)
from .periodogram import (
    FrequencyGrid,
    default_grid,
    fourier_grid,
    fourier_transform,
    periodogram_grid,
    power,
    uniform_grid,
)
from .functionals import (
    FunctionalEstimate,
    WeightFunction,
    constant,
    cosine_poly,
    estimate,
    estimate_batch,
    indicator_band,
    parse_weight,
)
from .oracle import (
    dft_covariance,
    enumerate_pair_partitions,
    exact_cov_J,
    exact_mean_J,
    fejer_kernel,
    indecomposable_pairings,
)
from .asymptotics import (
    ExponentCondition,
    check_exponents,
    clt_covariance_matrix,
    cumulant_order_bound,
    limit_covariance,
    limit_mean,
)
from .montecarlo import (
    ExperimentConfig,
    ExperimentReport,
    replicate_functionals,
    run_convergence,
    run_f4_discrimination,
    run_normality,
    run_suite,
)
