"""Quality of covariance-selection models for zero-mean Gaussians.

The CAM spectrum of a (Sigma_X, Sigma_M) pair drives everything here: the
KL/Jeffreys divergences, the exact AUC of the likelihood-ratio detector that
tells the two apart, and closed-form bounds on that AUC.
"""
from .auc_bounds import (
    BoundReport,
    asymptotic_lower,
    asymptotic_upper,
    bound_report,
    chernoff_lower,
    feasible_region_curve,
    kl_upper_bound,
)
from .chow_liu import chow_liu_tree, mutual_info_weight
from .divergences import DivergenceSet, divergences_from_spectrum, gaussian_kl
from .errors import CovselError, NumericalError, ValidationError
from .generators import (
    SensorLayout,
    chain_model,
    kernel_network,
    load_matrix_csv,
    random_correlation,
    star_model,
    toeplitz_equicorrelation,
)
from .graph_model import EdgeSet, ModelCovariance, TreeStructure, covariance_select
from .matrix_core import CamSpectrum, CorrelationMatrix, cam, cam_spectrum, spectrum_of, validate_correlation
from .quadrature import QuadratureConfig
from .report import QualityReport, assess
from .spectral_auc import auc_exact, cdf_ldelta

__version__ = "0.1.0"
