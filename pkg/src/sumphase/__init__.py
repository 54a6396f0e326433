"""Random subsets under integer linear forms: images, representation counts and phase transitions."""

from .errors import *  # noqa: F401,F403
from .forms import LinearForm, new_linear_form, parse_form, symmetry_order, redundancy_order, complement_adjustment
from .sets import (SubsetBitVector, ImageSet, sample_subset, evaluate_image, complement_size,
                   raw_complement_size, representation_count)
from .enumeration import (ExpressionClass, CountTable, irwin_hall_density, lambda_k, enumerate_expressions,
                          count_expressions, count_by_ground_size, count_table, gaussian_binomial,
                          partition_count, weak_composition_count, asymptotic_fit_report)
from .theory import (RegimeSpec, Prediction, predict, predict_subcritical, predict_critical,
                     predict_supercritical_complement, generalized_sumset_critical, generalized_ratio,
                     hm_identity_sides, hm_identity_residual)
from .poisson import (DependencyAccounting, EmpiricalPmf, LowerBoundCertificate, mean_count, stein_chen_bounds,
                      empirical_count_law, tv_to_poisson, tv_standard_error, lower_bound_certificate)
from .seeding import derive_seed
from .sim import ExperimentConfig, CellSummary, TrialRecord, run_cell, sweep, mstd_frequency

__version__ = "0.1.0"
