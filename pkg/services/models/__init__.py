from .models_service import (
    FAMILIES,
    FAMILY_CHERIYAN,
    FAMILY_INDEPENDENT,
    FAMILY_KIBBLE_MORAN,
    FAMILY_NEGATIVE,
    FAMILY_POSITIVE,
    DependenceModel,
    DiscretePhaseType,
    FiniteSupport,
    MomentReport,
    PairComponent,
    PairSample,
    build_dph_scenario,
    build_scenario,
    check_stability,
    cheriyan_ramabhadran,
    joint_lst,
    kibble_moran,
    load_model,
    marginal_b_lst,
    marginal_b_tail,
    mm1,
    model_from_dict,
    model_to_dict,
    moments,
    uniform_scenario,
    y_transform,
    y_transform_at,
)
from .sampling_utils import sample_pair, sample_pairs, sample_residual_pair, sample_residual_pairs

__all__ = [
    "FAMILIES",
    "FAMILY_CHERIYAN",
    "FAMILY_INDEPENDENT",
    "FAMILY_KIBBLE_MORAN",
    "FAMILY_NEGATIVE",
    "FAMILY_POSITIVE",
    "DependenceModel",
    "DiscretePhaseType",
    "FiniteSupport",
    "MomentReport",
    "PairComponent",
    "PairSample",
    "build_dph_scenario",
    "build_scenario",
    "check_stability",
    "cheriyan_ramabhadran",
    "joint_lst",
    "kibble_moran",
    "load_model",
    "marginal_b_lst",
    "marginal_b_tail",
    "mm1",
    "model_from_dict",
    "model_to_dict",
    "moments",
    "sample_pair",
    "sample_pairs",
    "sample_residual_pair",
    "sample_residual_pairs",
    "uniform_scenario",
    "y_transform",
    "y_transform_at",
]
