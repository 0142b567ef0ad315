"""Alpha-stable distributions in the continuous (M0) parameterization.

Characteristic function and cumulant derivatives, density/score evaluation
by inversion quadrature, Fisher information, sampling, and box-constrained
maximum-likelihood estimation.
"""

from .params import ParamIndex, StableParams, Validity, validate
from .quadrature import QuadratureConfig, QuadratureError
# the chf *function* stays on the submodule (stablem0.chf.chf) so that the
# submodule name itself is not shadowed
from .chf import (CumulantGradient, CumulantHessian, chf_grad, chf_hess,
                  chf_grad_tderiv, cumulant, cumulant_grad, cumulant_hess)
from .density import (DegenerateFit, DensityBundle, bundle, pdf, pdf_grad,
                      pdf_grad_x, pdf_hess, pdf_many, pdf_x_deriv, tail_slope)
from .score import DensityFloorError, ScoreBundle, score_at, score_tail_probe
from .fisher import (FisherMatrix, fisher_cauchy_approx, fisher_exact_cauchy,
                     fisher_generic)
from .sampler import SampleSpec, sample
from .mle import (DataError, FitConfig, FitResult, McReport,
                  NonConvergenceError, fit, loglik, mc_normality)

__version__ = "0.1.0"

__all__ = [
    "ParamIndex", "StableParams", "Validity", "validate",
    "QuadratureConfig", "QuadratureError",
    "CumulantGradient", "CumulantHessian", "chf_grad", "chf_hess",
    "chf_grad_tderiv", "cumulant", "cumulant_grad", "cumulant_hess",
    "DegenerateFit", "DensityBundle", "bundle", "pdf", "pdf_grad",
    "pdf_grad_x", "pdf_hess", "pdf_many", "pdf_x_deriv", "tail_slope",
    "DensityFloorError", "ScoreBundle", "score_at", "score_tail_probe",
    "FisherMatrix", "fisher_cauchy_approx", "fisher_exact_cauchy",
    "fisher_generic",
    "SampleSpec", "sample",
    "DataError", "FitConfig", "FitResult", "McReport",
    "NonConvergenceError", "fit", "loglik", "mc_normality",
]
