"""Reconstruction of kernel-space functions from randomized node designs.

The package is organized in five layers: spectral kernel models
(:mod:`dppfit.spectral`), node-design samplers (:mod:`dppfit.designs`),
reconstruction schemes (:mod:`dppfit.approximants`), error functionals and
the Monte-Carlo harness (:mod:`dppfit.metrics`), identity-check suites
(:mod:`dppfit.verify`) and the batch CLI (:mod:`dppfit.cli`).
"""

from .approximants import (EigenExpansion, KernelMix, els, evaluate, oka,
                           okq_transform, ls, qi_transform, tels)
from .designs import (Design, christoffel_density, sample_christoffel_iid,
                      sample_cvs, sample_projection_dpp, sample_subset_esp)
from .linalg import IllConditionedSystem
from .metrics import (DesignSpec, ErrorRecord, SchemeSpec, SpectralTails,
                      beta_N, epsilon_m_N, fit_loglog_slope,
                      l2_residual_eigen, l2_residual_kernelmix,
                      mc_error_study, rkhs_residual_oka)
from .spectral import (SpectralModel, TargetFunction, eigen_target,
                       make_legendre, make_model, make_periodic_sobolev,
                       make_sinc_pswf, make_sphere_sobolev,
                       random_gaussian_target)

__version__ = "0.1.0"
