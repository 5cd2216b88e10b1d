"""Transform-domain tensor low-rank representation toolkit."""

from .transforms import (
    TransformKind,
    TransformSpec,
    TransformedTensor,
    apply_transform,
    build_transform,
    invert_transform,
)
from .tlinalg import (
    SkinnyTSVD,
    conj_transpose,
    identity_tensor,
    norms,
    pseudo_inverse,
    t_product,
    t_svd_skinny,
    tensor_nuclear_norm,
    tensor_spectral_norm,
    tubal_rank,
)
from .solver import (
    SolverConfig,
    SolverResult,
    prox_l21,
    prox_tensor_nuclear,
    scaled_lambda,
    solve_j_subproblem,
    solve_ortlrr,
)
from .solver_missing import (
    MissingSolverOptions,
    ObservationMask,
    Penalty,
    project_omega,
    prox_l1_masked,
    prox_l21_masked,
    solve_ortlrr_ewzf,
)
from .pipeline import (
    OutlierPartition,
    ambiguity_norm,
    build_affinity,
    detect_outliers,
    eval_clustering,
    eval_outlier_auc,
    incoherence_mu,
    outlier_scores,
    rowspace_error,
    spectral_cluster,
    support_distance,
)
from .synth import (
    SynthParams,
    SyntheticInstance,
    apply_missing_mask,
    generate_instance,
    lift_vector_representation,
)
from .tensor_io import T3BError, read_tensor, write_tensor
from .experiment import ExperimentConfig, MetricsRecord, run_experiment

__all__ = [name for name in dir() if not name.startswith("_")]
