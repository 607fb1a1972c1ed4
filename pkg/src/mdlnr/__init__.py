"""Sparse weighted network reconstruction from node-state data by minimum
description length, with L1, decimation and true-prior baselines, samplers
and clamping perturbations."""
import os as _os

# cap BLAS worker threads before numpy loads
if _os.environ.get("MDLNR_THREADS"):
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        _os.environ.setdefault(_var, _os.environ["MDLNR_THREADS"])

from .baselines import (CvResult, DecimationTrajectory, FitResult, L1Config,  # noqa: E402
                        cross_validate_l1, decimate, reconstruct_l1,
                        reconstruct_true_prior)
from .graph_state import (Categories, DataError, Dataset, NodeFields,  # noqa: E402
                          SelfLoopError, UnknownCategoryError, WeightCategories,
                          WeightedNetwork, binarize, set_entry)
from .inference import (CandidateSet, OptimizerConfig, random_bisection,  # noqa: E402
                        reconstruct_mdl)
from .metrics import jaccard_binary, jaccard_weighted  # noqa: E402
from .models import ModelState  # noqa: E402
from .prior import (PriorHyper, description_length, neglog_prior_theta,  # noqa: E402
                    neglog_prior_weights, qlaplace_neglogmass)
from .report import RunReport  # noqa: E402
from .simulate import (ChainDiagnostics, MCSpec, PerturbationResult,  # noqa: E402
                       boltzmann_exact, keystone_scan, perturb_keystone, plant_weights,
                       sample_equilibrium, sample_kinetic)

__version__ = "0.1.0"
