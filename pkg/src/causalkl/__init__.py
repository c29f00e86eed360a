"""Scoring learned causal Bayesian networks against a known truth.

Structural metrics (edit distance and its dependence-weighted variants),
distributional KL, and causal KL computed over intervention-augmented models,
plus a benchmark harness that reproduces the built-in metastatic-network
experiments.
"""
from .augmentation import (STAR, InterventionConfig, InterventionScheme,
                           InterventionSupport, augmented_joint,
                           intervened_conditional, intervention_support)
from .divergence import (DivergenceValue, Wed3Term, calibrate_log_base, ckl,
                         ckl3, kl, wed3, wed3_decomposition)
from .errors import (CapacityError, CausalklError, ScopeError,
                     StructuralError, ZeroMassError)
from .fileio import (load_dag, load_dataset, load_network, load_path_model,
                     network_from_dict, network_to_dict, save_dag,
                     save_dataset, save_network, save_path_model)
from .harness import (AuditReport, Cell, CptTweak, ExperimentConfig,
                      MetricReport, Mutation, apply_mutation,
                      builtin_metastatic_suite, derived_seed,
                      desiderata_audit, path_mirror,
                      positivity_probe_network, run, run_finite,
                      run_infinite, scale_factor)
from .network import (Cpt, Dag, Dataset, DiscreteNetwork, JointTable,
                      Variable, conditional, fit_mle, joint_distribution,
                      marginal, mutual_information, project_parameters,
                      sample, topological_order)
from .structure import (EditOp, EditScript, PathModel, Pattern, edit_distance,
                        edit_script, pattern_of, same_pattern, wed_d, wed_p)

__version__ = "0.1.0"

__all__ = [
    "STAR", "InterventionConfig", "InterventionScheme", "InterventionSupport",
    "augmented_joint", "intervened_conditional", "intervention_support",
    "DivergenceValue", "Wed3Term", "calibrate_log_base", "ckl", "ckl3", "kl",
    "wed3", "wed3_decomposition",
    "CapacityError", "CausalklError", "ScopeError", "StructuralError",
    "ZeroMassError",
    "load_dag", "load_dataset", "load_network", "load_path_model",
    "network_from_dict", "network_to_dict", "save_dag", "save_dataset",
    "save_network", "save_path_model",
    "AuditReport", "Cell", "CptTweak", "ExperimentConfig", "MetricReport",
    "Mutation", "apply_mutation", "builtin_metastatic_suite", "derived_seed",
    "desiderata_audit", "path_mirror", "positivity_probe_network", "run",
    "run_finite", "run_infinite", "scale_factor",
    "Cpt", "Dag", "Dataset", "DiscreteNetwork", "JointTable", "Variable",
    "conditional", "fit_mle", "joint_distribution", "marginal",
    "mutual_information", "project_parameters", "sample",
    "topological_order",
    "EditOp", "EditScript", "PathModel", "Pattern", "edit_distance",
    "edit_script", "pattern_of", "same_pattern", "wed_d", "wed_p",
]
